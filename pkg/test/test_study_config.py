import glob
import json
import logging
import math
import os

import pytest
import yaml

import study_config.dict_reflection as dr
from palm_extremes.sampling import GaussPoissonParams
from study_config import ConfigError, ExperimentConfig, apply_overrides, load_config


def minimal(**fields):
    data = {'schema_version': 1, 'kind': 'nn-gp'}
    data.update(fields)
    return data


def test_defaults():
    config = ExperimentConfig.from_dict(minimal())
    assert config.n == 10000.0
    assert config.tau == 1.0
    assert config.replications == 100
    assert config.guard == 3.0
    assert config.order_ks == [1, 2]
    assert config.delaunay_backend == 'qhull'
    assert config.workers is None
    assert config.c_n is None
    assert config.cluster_radius == pytest.approx(math.log(1e4))
    assert config.gauss_poisson.to_params() == GaussPoissonParams(0.2, 0.6, 0.2)
    data = config.to_dict()
    assert data['gauss_poisson'] == {'p0': 0.2, 'p1': 0.6, 'p2': 0.2}
    assert data['threshold_grid'] == [1000.0, 10000.0, 100000.0, 1000000.0]


def test_defaults_are_not_shared():
    first = ExperimentConfig.from_dict(minimal())
    first.order_ks.append(3)
    assert ExperimentConfig.from_dict(minimal()).order_ks == [1, 2]


def test_integers_become_floats():
    config = ExperimentConfig.from_dict(minimal(n=100, c_n=2))
    assert isinstance(config.n, float)
    assert config.cluster_radius == 2.0


@pytest.mark.parametrize('data', [
    {'kind': 'nn-gp'},
    {'schema_version': 1},
    minimal(schema_version=2),
    minimal(bogus=1),
    minimal(kind='wavelets'),
    minimal(n='big'),
    minimal(n=0),
    minimal(n=float('inf')),
    minimal(tau=-1.0),
    minimal(replications=0),
    minimal(replications=1.5),
    minimal(replications=True),
    minimal(guard=-0.1),
    minimal(master_seed=-1),
    minimal(order_ks=[]),
    minimal(order_ks=[1, 0]),
    minimal(delaunay_backend='flip'),
    minimal(gauss_poisson={'p0': 0.5, 'p1': 0.6, 'p2': 0.2}),
    minimal(gauss_poisson={'p0': 0.0, 'p1': 0.8, 'p2': 0.2}),
    minimal(gauss_poisson={'p1': 1.5}),
    minimal(gauss_poisson={'p3': 0.1}),
    minimal(gauss_poisson=[0.2, 0.6, 0.2]),
])
def test_invalid_documents(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_error_paths_name_the_key():
    with pytest.raises(ConfigError, match=r'\$\.gauss_poisson\.p1'):
        ExperimentConfig.from_dict(minimal(gauss_poisson={'p1': 'x'}))
    with pytest.raises(ConfigError, match='unknown key: bogus'):
        ExperimentConfig.from_dict(minimal(bogus=1))


def test_not_a_mapping():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([1, 2])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_string('{')


def test_unknown_constructor_field():
    with pytest.raises(TypeError):
        ExperimentConfig(bogus=1)


def test_warn_error_handler(caplog):
    previous = dr.set_error_handler(dr.warn_error)
    try:
        with caplog.at_level(logging.WARNING):
            config = ExperimentConfig.from_dict(minimal(bogus=1))
    finally:
        dr.set_error_handler(previous)
    assert config.kind == 'nn-gp'
    assert 'unknown key: bogus' in caplog.text
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(minimal(bogus=1))


def test_apply_overrides():
    data = minimal()
    out = apply_overrides(data, ['tau=5', 'gauss_poisson.p1=0.5', 'order_ks=[1, 3]'])
    assert out['tau'] == 5
    assert out['gauss_poisson'] == {'p1': 0.5}
    assert out['order_ks'] == [1, 3]
    assert 'tau' not in data
    with pytest.raises(ConfigError):
        apply_overrides(data, ['tau'])
    with pytest.raises(ConfigError):
        apply_overrides(data, ['=1'])
    with pytest.raises(ConfigError):
        apply_overrides(data, ['kind.sub=1'])
    with pytest.raises(ConfigError):
        apply_overrides(data, ['tau=[1'])


def test_load_config(tmp_path):
    path = tmp_path / 'study.json'
    path.write_text(json.dumps(minimal(replications=5)))
    assert load_config(str(path)).replications == 5
    assert load_config(str(path), ['replications=7']).replications == 7
    yaml_path = tmp_path / 'study.yaml'
    yaml_path.write_text('schema_version: 1\nkind: mardia\nsamples: 2000\n')
    assert load_config(str(yaml_path)).samples == 2000
    bad = tmp_path / 'bad.json'
    bad.write_text('[1, 2]')
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError, match='Cannot read config'):
        load_config(str(tmp_path / 'missing.json'))


def test_exponent_numbers_stay_numbers(tmp_path):
    path = tmp_path / 'study.json'
    path.write_text(json.dumps(minimal(kind='thresholds', tau=1e-05, n=1e5)))
    assert '1e-05' in path.read_text()
    config = load_config(str(path))
    assert config.tau == 1e-05
    assert config.n == 1e5
    assert load_config(str(path), ['n=1e5', 'c_n=2e0']).n == 100000.0
    assert apply_overrides({}, ['tau=1e-05'])['tau'] == 1e-05
    assert apply_overrides({}, ['delaunay_backend=qhull'])['delaunay_backend'] == 'qhull'
    assert ExperimentConfig.from_string('{"schema_version": 1, "kind": "mardia", "n": 1e-4}').n == 1e-4


def test_angle_study_needs_positive_cluster_radius():
    for n in (1, 0.5):
        with pytest.raises(ConfigError, match=r'\$\.c_n'):
            ExperimentConfig.from_dict(minimal(kind='delaunay-angles', n=n))
    assert ExperimentConfig.from_dict(minimal(kind='delaunay-angles', n=1, c_n=2)).cluster_radius == 2.0
    assert ExperimentConfig.from_dict(minimal(kind='mardia', n=1e-4)).n == 1e-4


def test_example_configs_load(root_dir):
    paths = sorted(glob.glob(os.path.join(root_dir, 'config', 'examples', '*.json')))
    assert len(paths) == 5
    kinds = set()
    for path in paths:
        config = load_config(path)
        kinds.add(config.kind)
        assert config.output.startswith('results/')
    assert kinds == {'nn-gp', 'delaunay-angles', 'mardia', 'cp-compare', 'thresholds'}


def test_schema_file_is_current(root_dir):
    with open(os.path.join(root_dir, 'config', 'experiment.schema.json')) as f:
        on_disk = json.load(f)
    assert on_disk == ExperimentConfig.to_json_schema()


def test_schema_shape():
    schema = ExperimentConfig.to_json_schema()
    assert schema['required'] == ['schema_version', 'kind']
    assert schema['additionalProperties'] is False
    assert schema['properties']['n'] == {'type': 'number', 'exclusiveMinimum': 0, 'default': 10000.0}
    assert schema['properties']['workers']['anyOf'][1] == {'type': 'null'}
    assert schema['properties']['gauss_poisson']['properties']['p1']['maximum'] == 1


def test_yaml_rendering():
    config = ExperimentConfig.from_dict(minimal(tau=2))
    rendered = yaml.safe_load(str(config))
    assert rendered['kind'] == 'nn-gp'
    assert rendered['tau'] == 2.0
    assert rendered['gauss_poisson']['p2'] == 0.2
