#!/usr/bin/env python
from setuptools import setup

d = dict(
    name='palm_extremes',
    version='0.1.0',
    description='Compound Poisson limits of Gauss-Poisson and Poisson-Delaunay exceedances',
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'PyYAML', 'pandas', 'joblib'],
    extras_require={'test': ['pytest']},
    scripts=['scripts/palm_extremes'],
    entry_points={'console_scripts': ['palm_extremes_cli=palm_extremes.cli:main']},
)
d['packages'] = ['palm_extremes', 'study_config', 'study_config.dict_reflection']
d['package_dir'] = {'': 'src'}

setup(**d)
