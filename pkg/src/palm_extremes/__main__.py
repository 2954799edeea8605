import sys

from palm_extremes.cli import main

sys.exit(main())
