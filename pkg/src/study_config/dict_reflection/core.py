from study_config.dict_reflection.basics import *
import copy
import logging

import yaml

logger = logging.getLogger(__name__)

# Do parent operations first, so a child reflection can add to them but never
# drop a parent key.


class ConfigError(ValueError):
	""" A document does not match its reflection """


def reflect(cls, *args, **kwargs):
	""" Simple wrapper to add dict reflection to a dict_reflection.Object class """
	cls.REFL = Reflection(*args, **kwargs)


def raise_error(message):
	raise ConfigError(message)


def warn_error(message):
	logger.warning(message)


# What to do on a schema error. Swap in warn_error to only log.
on_error = raise_error


def set_error_handler(handler):
	""" Returns the previous handler so callers can restore it """
	global on_error
	previous = on_error
	on_error = handler
	return previous


def report(message):
	on_error(message)


# Registering Types
value_types = {}


def add_type(key, value):
	assert key not in value_types
	value_types[key] = value


def get_type(cur_type):
	""" Can wrap value types if needed """
	value_type = value_types.get(cur_type)
	if value_type is None:
		value_type = make_type(cur_type)
		add_type(cur_type, value_type)
	return value_type


def make_type(cur_type):
	if isinstance(cur_type, ValueType):
		return cur_type
	elif isinstance(cur_type, str):
		if cur_type.startswith('list:'):
			return ListType(cur_type[5:])
		raise Exception("Invalid value type: {}".format(cur_type))
	elif isinstance(cur_type, type) and issubclass(cur_type, Object):
		return ObjectType(cur_type)
	elif cur_type in [str, float, int, bool]:
		return BasicType(cur_type)
	else:
		raise Exception("Invalid type: {}".format(cur_type))


class ValueType(object):
	""" Primitive value type """
	def from_value(self, value, path):
		return value

	def to_value(self, value):
		return value

	def schema(self):
		return {}

	def equals(self, a, b):
		return a == b


_JSON_NAMES = {str: 'string', float: 'number', int: 'integer', bool: 'boolean'}


class BasicType(ValueType):
	def __init__(self, cur_type):
		self.type = cur_type

	def from_value(self, value, path):
		if self.type is float:
			if not is_real(value):
				raise ConfigError("{}: expected a finite number, got {!r}".format(path, value))
			return float(value)
		if self.type is int:
			if isinstance(value, bool) or not isinstance(value, int):
				raise ConfigError("{}: expected an integer, got {!r}".format(path, value))
			return value
		if not isinstance(value, self.type):
			raise ConfigError("{}: expected {}, got {!r}".format(path, _JSON_NAMES[self.type], value))
		return value

	def schema(self):
		return {'type': _JSON_NAMES[self.type]}


class BoundedType(BasicType):
	""" Number with an optional lower and upper bound """
	def __init__(self, cur_type, minimum=None, maximum=None, exclusive_minimum=False):
		BasicType.__init__(self, cur_type)
		self.minimum = minimum
		self.maximum = maximum
		self.exclusive_minimum = exclusive_minimum

	def from_value(self, value, path):
		value = BasicType.from_value(self, value, path)
		if self.minimum is not None:
			if value < self.minimum or (self.exclusive_minimum and value == self.minimum):
				relation = '>' if self.exclusive_minimum else '>='
				raise ConfigError("{}: must be {} {}, got {!r}".format(path, relation, self.minimum, value))
		if self.maximum is not None and value > self.maximum:
			raise ConfigError("{}: must be <= {}, got {!r}".format(path, self.maximum, value))
		return value

	def schema(self):
		out = BasicType.schema(self)
		if self.minimum is not None:
			out['exclusiveMinimum' if self.exclusive_minimum else 'minimum'] = self.minimum
		if self.maximum is not None:
			out['maximum'] = self.maximum
		return out


class EnumType(ValueType):
	def __init__(self, choices):
		self.choices = list(choices)

	def from_value(self, value, path):
		if value not in self.choices:
			raise ConfigError("{}: expected one of {}, got {!r}".format(path, ', '.join(self.choices), value))
		return value

	def schema(self):
		return {'type': 'string', 'enum': list(self.choices)}


class ListType(ValueType):
	def __init__(self, item_type):
		self.item_type = get_type(item_type)

	def from_value(self, values, path):
		if not isinstance(values, list) or not values:
			raise ConfigError("{}: expected a non-empty list, got {!r}".format(path, values))
		return [self.item_type.from_value(v, '{}[{}]'.format(path, i)) for (i, v) in enumerate(values)]

	def to_value(self, values):
		return [self.item_type.to_value(v) for v in values]

	def schema(self):
		return {'type': 'array', 'items': self.item_type.schema(), 'minItems': 1}

	def equals(self, aValues, bValues):
		return len(aValues) == len(bValues) and all(a == b for (a, b) in zip(aValues, bValues))


class ObjectType(ValueType):
	def __init__(self, cur_type):
		self.type = cur_type

	def from_value(self, value, path):
		if not isinstance(value, dict):
			raise ConfigError("{}: expected a mapping, got {!r}".format(path, value))
		obj = self.type()
		obj.read_dict(value, path)
		return obj

	def to_value(self, obj):
		return obj.to_dict()

	def schema(self):
		return self.type.REFL.schema()


class Param(object):
	"""
	@param key: document key
	@param var: Python attribute name. By default it's the same as the key
	"""
	def __init__(self, key, value_type, required = True, default = None, var = None):
		self.key = key
		if var is None:
			self.var = key
		else:
			self.var = var
		self.type = None
		self.value_type = get_type(value_type)
		self.default = default
		if required:
			assert default is None, "Default does not make sense for a required field"
		self.required = required

	def set_default(self, obj, path):
		if self.required:
			report("{}: required {} not set: {}".format(path, self.type, self.key))
			setattr(obj, self.var, None)
		else:
			setattr(obj, self.var, copy.deepcopy(self.default))

	def set_from_value(self, obj, value, path):
		# an optional key with no default may be given as null
		if value is None and not self.required and self.default is None:
			setattr(obj, self.var, None)
			return
		setattr(obj, self.var, self.value_type.from_value(value, '{}.{}'.format(path, self.key)))

	def add_to_dict(self, obj, out):
		value = getattr(obj, self.var)
		if value is None:
			if self.required:
				raise ConfigError("Required {} not set in object: {}".format(self.type, self.var))
			out[self.key] = None
		else:
			out[self.key] = self.value_type.to_value(value)

	def schema(self):
		out = self.value_type.schema()
		if not self.required and self.default is None:
			out = {'anyOf': [out, {'type': 'null'}]}
		elif self.default is not None:
			out = dict(out, default=self.value_type.to_value(self.default))
		return out


class Attribute(Param):
	def __init__(self, key, value_type, required = True, default = None, var = None):
		Param.__init__(self, key, value_type, required, default, var)
		self.type = 'attribute'


class Section(Param):
	""" Nested mapping, reflected by its own Object class """
	def __init__(self, key, value_type, required = True, default = None, var = None):
		Param.__init__(self, key, value_type, required, default, var)
		self.type = 'section'

	def schema(self):
		return self.value_type.schema()


class Reflection(object):
	def __init__(self, params = [], parent_cls = None, title = None):
		""" Construct a dict reflection thing
		@param parent_cls: Parent class, to use it's reflection as well.
		@param title: Only used for the JSON schema of a top-level object.
		"""
		if parent_cls is not None:
			self.parent = parent_cls.REFL
		else:
			self.parent = None
		self.title = title

		self.params = list(params)
		self.vars = []
		self.paramMap = {}
		self.required_names = []
		for param in self.params:
			self.paramMap[param.key] = param
			self.vars.append(param.var)
			if param.required:
				self.required_names.append(param.key)
		if self.parent:
			self.vars = self.parent.vars + self.vars

	def all_params(self):
		if self.parent:
			return self.parent.all_params() + self.params
		return list(self.params)

	def set_from_dict(self, obj, data, path = '$', unconsumed = None):
		is_final = False
		if unconsumed is None:
			is_final = True
			unconsumed = list(data.keys())

		if self.parent:
			self.parent.set_from_dict(obj, data, path, unconsumed)

		unset = list(self.paramMap.keys())
		for key in list(unconsumed):
			param = self.paramMap.get(key)
			if param is not None:
				param.set_from_value(obj, data[key], path)
				unset.remove(key)
				unconsumed.remove(key)

		for param in map(self.paramMap.get, unset):
			param.set_default(obj, path)

		if is_final:
			for key in unconsumed:
				report('{}: unknown key: {}'.format(path, key))

	def add_to_dict(self, obj, out):
		if self.parent:
			self.parent.add_to_dict(obj, out)
		for param in self.params:
			param.add_to_dict(obj, out)

	def schema(self):
		params = self.all_params()
		out = {
			'type': 'object',
			'properties': dict((p.key, p.schema()) for p in params),
			'required': [p.key for p in params if p.required],
			'additionalProperties': False,
		}
		if self.title is not None:
			out = dict({'$schema': 'http://json-schema.org/draft-07/schema#', 'title': self.title}, **out)
		return out


class Object(YamlReflection):
	""" Raw python object for yaml / dict representation """
	REFL = None

	def get_refl_vars(self):
		return self.REFL.vars

	def check_valid(self):
		pass

	def post_read_dict(self):
		pass

	def read_dict(self, data, path = '$'):
		if not isinstance(data, dict):
			raise ConfigError("{}: expected a mapping, got {!r}".format(path, data))
		self.REFL.set_from_dict(self, data, path)
		self.post_read_dict()
		self.check_valid()

	def to_dict(self):
		self.check_valid()
		out = {}
		self.REFL.add_to_dict(self, out)
		return out

	@classmethod
	def from_dict(cls, data):
		obj = cls()
		obj.read_dict(data)
		return obj

	@classmethod
	def from_string(cls, text):
		""" JSON, or yaml when the text is not JSON """
		try:
			data = load_document(text)
		except yaml.YAMLError as e:
			raise ConfigError("Unparseable document: {}".format(e))
		return cls.from_dict(data)

	@classmethod
	def from_file(cls, file_path):
		with open(file_path, 'r') as f:
			return cls.from_string(f.read())

	@classmethod
	def to_json_schema(cls):
		return cls.REFL.schema()


# Really common types
add_type('positive_float', BoundedType(float, minimum=0, exclusive_minimum=True))
add_type('nonnegative_float', BoundedType(float, minimum=0))
add_type('probability', BoundedType(float, minimum=0, maximum=1))
add_type('positive_int', BoundedType(int, minimum=1))
add_type('nonnegative_int', BoundedType(int, minimum=0))
add_type('seed', BoundedType(int, minimum=0, maximum=2 ** 64 - 1))
