from study_config.dict_reflection.core import *
