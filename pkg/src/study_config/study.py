import copy
import math

import yaml

import study_config.dict_reflection as dr
from study_config.dict_reflection import ConfigError

SCHEMA_VERSION = 1
SCHEMA_TITLE = 'palm_extremes experiment config'

dr.add_type('study_kind', dr.EnumType(['nn-gp', 'delaunay-angles', 'mardia', 'cp-compare', 'thresholds']))
dr.add_type('delaunay_backend', dr.EnumType(['bowyer-watson', 'qhull']))


class GaussPoissonSection(dr.Object):
	def __init__(self, p0=None, p1=None, p2=None):
		self.p0 = p0
		self.p1 = p1
		self.p2 = p2

	def check_valid(self):
		if None in (self.p0, self.p1, self.p2):
			return
		if abs(self.p0 + self.p1 + self.p2 - 1.0) > 1e-12:
			dr.report('gauss_poisson: p0 + p1 + p2 must equal 1, got {!r}'.format(self.p0 + self.p1 + self.p2))
		if not (self.p0 > 0 and self.p1 > 0):
			dr.report('gauss_poisson: p0 and p1 must be positive')

	def to_params(self):
		from palm_extremes.sampling import GaussPoissonParams
		return GaussPoissonParams(self.p0, self.p1, self.p2)

dr.reflect(GaussPoissonSection, params = [
	dr.Attribute('p0', 'probability', False, 0.2),
	dr.Attribute('p1', 'probability', False, 0.6),
	dr.Attribute('p2', 'probability', False, 0.2),
	])


class ExperimentConfig(dr.Object):
	"""
	One study run.  Every field is declared once in the reflection below,
	which also generates config/experiment.schema.json.
	"""
	def __init__(self, **kwargs):
		for var in self.REFL.vars:
			setattr(self, var, kwargs.pop(var, None))
		if kwargs:
			raise TypeError('Unknown config fields: {}'.format(', '.join(sorted(kwargs))))

	def check_valid(self):
		if self.schema_version is not None and self.schema_version != SCHEMA_VERSION:
			dr.report('$.schema_version: expected {}, got {!r}'.format(SCHEMA_VERSION, self.schema_version))
		if self.kind == 'delaunay-angles' and self.c_n is None and self.n is not None and self.n <= 1:
			dr.report('$.c_n: required when n <= 1, log n would not be positive')

	@property
	def cluster_radius(self):
		""" c_n, log n unless overridden """
		return self.c_n if self.c_n is not None else math.log(self.n)

dr.reflect(ExperimentConfig, title = SCHEMA_TITLE, params = [
	dr.Attribute('schema_version', int),
	dr.Attribute('kind', 'study_kind'),
	dr.Attribute('n', 'positive_float', False, 10000.0),
	dr.Attribute('tau', 'positive_float', False, 1.0),
	dr.Section('gauss_poisson', GaussPoissonSection, False, GaussPoissonSection(0.2, 0.6, 0.2)),
	dr.Attribute('replications', 'positive_int', False, 100),
	dr.Attribute('master_seed', 'seed', False, 0),
	dr.Attribute('guard', 'nonnegative_float', False, 3.0),
	dr.Attribute('c_n', 'positive_float', False),
	dr.Attribute('output', str, False, 'results'),
	dr.Attribute('workers', 'positive_int', False),
	dr.Attribute('samples', 'positive_int', False, 1000000),
	dr.Attribute('d2_samples', 'positive_int', False, 500),
	dr.Attribute('order_ks', 'list:positive_int', False, [1, 2]),
	dr.Attribute('delaunay_backend', 'delaunay_backend', False, 'qhull'),
	dr.Attribute('threshold_grid', 'list:positive_float', False, [1000.0, 10000.0, 100000.0, 1000000.0]),
	])


def apply_overrides(data, overrides):
	"""
	Apply 'key=value' strings to a config mapping.  Dotted keys reach into
	sections and values are parsed as JSON or yaml, so 'tau=5' sets a number.
	"""
	out = copy.deepcopy(data)
	for item in overrides:
		key, sep, text = item.partition('=')
		if not sep or not key:
			raise ConfigError('Override must look like key=value, got {!r}'.format(item))
		try:
			value = dr.load_document(text)
		except yaml.YAMLError as e:
			raise ConfigError('Unparseable override value {!r}: {}'.format(text, e))
		target = out
		parts = key.split('.')
		for part in parts[:-1]:
			target = target.setdefault(part, {})
			if not isinstance(target, dict):
				raise ConfigError('Override {!r} reaches into a non-section'.format(key))
		target[parts[-1]] = value
	return out


def load_config(file_path, overrides = ()):
	try:
		with open(file_path, 'r') as f:
			text = f.read()
	except OSError as e:
		raise ConfigError('Cannot read config {}: {}'.format(file_path, e.strerror or e))
	try:
		data = dr.load_document(text)
	except yaml.YAMLError as e:
		raise ConfigError('Unparseable config {}: {}'.format(file_path, e))
	if not isinstance(data, dict):
		raise ConfigError('Config {} must be a mapping'.format(file_path))
	return ExperimentConfig.from_dict(apply_overrides(data, overrides))
