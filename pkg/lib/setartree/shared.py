"""
Global config, shared errors and small helpers for setartree.
"""
import configparser
import functools
import importlib.metadata
import logging
import os
import pathlib
import tempfile

_PACKAGE_NAME = 'setartree'
_FALLBACK_VERSION = '0.1.0'
_MASK64 = 0xFFFFFFFFFFFFFFFF


class SetarError(Exception):
    """Root of every error the CLI turns into an exit code."""
    category = 'internal'
    exit_code = 1


class UsageError(SetarError):
    category = 'usage'
    exit_code = 2


class ConfigError(UsageError):
    pass


class DataError(SetarError):
    category = 'data'
    exit_code = 3


class NumericalError(SetarError):
    category = 'numerical'
    exit_code = 4


class DimensionMismatch(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


def home_dir():
    return os.path.expanduser('~')


def derive_seed(seed, index):
    """
    Mix a base seed and an index into a new 64-bit seed.

    This is the SplitMix64 finalizer applied to ``seed + (index + 1) * golden``,
    so streams for different indexes are decorrelated and every port can
    reproduce them.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def atomic_write(path, text):
    """Write text next to ``path`` and rename it into place."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fp:
            fp.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


class GlobalConfig(object):
    base_logger_name = _PACKAGE_NAME
    default_logger_level = logging.WARN
    package_name = _PACKAGE_NAME
    logger_level = logging.INFO
    threads_env_var = 'SETAR_THREADS'
    default_grid_size = 15
    # The first one ([0]) is the default.
    commands = [
        {'option': 'run', 'routine': 'run'},
        {'option': 'simulate', 'routine': 'simulate'},
        {'option': 'split', 'routine': 'split'},
        {'option': 'train', 'routine': 'train'},
        {'option': 'train-forest', 'routine': 'train_forest'},
        {'option': 'forecast', 'routine': 'forecast'},
        {'option': 'evaluate', 'routine': 'evaluate'},
        {'option': 'show-model', 'routine': 'show_model'},
    ]

    def __init__(self, config_file=None):
        self.logger = self.build_logger(self)
        self._config_file = config_file

    @functools.cached_property
    def version(self):
        try:
            return importlib.metadata.version(self.package_name)
        except importlib.metadata.PackageNotFoundError:
            return _FALLBACK_VERSION

    def _build_config_file(self):
        config_file = os.path.join(
            home_dir(),
            '.{0}'.format(self.package_name),
            'config.ini'
        )
        self.logger.debug(f'Built config file: {config_file}')
        return config_file

    @property
    def config_file(self):
        if self._config_file is None:
            self._config_file = self._build_config_file()
        return self._config_file

    def _get_config_object(self):
        conf = configparser.ConfigParser()
        if not os.path.exists(self.config_file):
            self.logger.debug('No config file, using defaults: %s', self.config_file)
            return conf
        self.logger.debug('Reading config file: {}'.format(self.config_file))
        try:
            conf.read(self.config_file)
        except configparser.Error as exc:
            raise ConfigError(f'Cannot parse config file: {self.config_file} ({exc})')
        return conf

    @functools.cached_property
    def conf(self):
        return self._get_config_object()

    def _get_int(self, key):
        raw = self.conf.get('default', key, fallback=None)
        if raw is None:
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f'Config value is not an integer: {key}={raw}')

    @property
    def grid_size(self):
        value = self._get_int('grid_size')
        return self.default_grid_size if value is None else value

    @property
    def log_level(self):
        return self.conf.get('default', 'log_level', fallback=None)

    def resolve_threads(self, requested=None):
        """Flag, then env var, then config file, then the CPU count."""
        threads = requested
        source = 'flag'
        if threads is None:
            raw = os.environ.get(self.threads_env_var)
            source = self.threads_env_var
            if raw is not None:
                try:
                    threads = int(raw)
                except ValueError:
                    raise ConfigError(f'{self.threads_env_var} is not an integer: {raw}')
        if threads is None:
            threads = self._get_int('threads')
            source = 'config'
        if threads is None:
            threads = os.cpu_count() or 1
            source = 'cpu_count'
        if threads < 1:
            raise UsageError(f'Thread count must be >= 1: {threads}')
        self.logger.debug('Threads: %d (from %s)', threads, source)
        return threads

    def build_logger(self, class_object):
        logger_name = self.build_logger_name(class_object)
        logger = logging.getLogger(logger_name)
        logger.debug('Logger created: {}'.format(logger.name))
        return logger

    def build_logger_name(self, class_object):
        this_name = class_object.__class__.__name__
        # Handles the case when it is called from a classmethod. Eg ...build_logger(cls)
        if this_name == 'type':
            this_name = class_object.__name__
        name = '.'.join([self.base_logger_name, this_name])
        return name


if __name__ == '__main__':
    pass
