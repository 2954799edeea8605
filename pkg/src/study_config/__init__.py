from study_config.dict_reflection import ConfigError
from study_config.study import (ExperimentConfig, GaussPoissonSection, SCHEMA_VERSION,
                                apply_overrides, load_config)
