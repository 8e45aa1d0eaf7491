"""
Train, forecast and evaluate SETAR-Tree and SETAR-Forest models on collections of series.
"""
import argparse
import logging
import sys

import setartree.pipeline
import setartree.shared


class SetarCli(object):

    def __init__(self):
        self._init_vars()
        self._init_logger()
        self._init_cli()

    def _init_vars(self):
        self.global_config = setartree.shared.GlobalConfig()
        self.logger = None
        self.command = None
        self.args = None

    def _init_logger(self):
        logger_name = self.global_config.base_logger_name
        self.logger = logging.getLogger(logger_name)
        format_string = '[%(levelname)s]'
        format_string += ' %(name)s(%(lineno)d)'
        format_string += ' - %(message)s'
        formatter = logging.Formatter(format_string)
        if not self.logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(formatter)
            handler.setLevel(self.global_config.default_logger_level)
            self.logger.addHandler(handler)
        self.logger.setLevel(self.global_config.default_logger_level)
        self.logger.debug('Logger initialized: {0}'.format(logger_name))

    def _add_paths(self):
        group = self.cli.add_argument_group('files')
        group.add_argument('--input', help='Series file (.csv: long format, else id:v1,v2,...).')
        group.add_argument('--out', dest='output', help='Output file of the command.')
        group.add_argument('--model', help='Saved model to read.')
        group.add_argument('--model-out', help='Where to save the trained model.')
        group.add_argument('--forecasts', help='Forecast CSV to evaluate.')
        group.add_argument('--actuals', help='Held-out actual values.')
        group.add_argument('--training', help='Training series (MASE scaling).')
        group.add_argument('--train-out', help='split: training part.')
        group.add_argument('--actuals-out', help='split: held-out part.')
        group.add_argument(
            '--covariates', dest='covariate_config',
            help='Covariate kinds file (cov.<name>.kind=numeric|categorical).')
        group.add_argument('--report', help='Write the run report (.json or YAML).')

    def _add_data(self):
        group = self.cli.add_argument_group('data')
        group.add_argument('--lag', type=int, help='Number of lags. (Default: heuristic)')
        group.add_argument('--horizon', type=int, help='Forecast horizon.')
        group.add_argument('--seasonality', type=int, help='Seasonal period for MASE and lags.')
        group.add_argument('--frequency', choices=['daily', 'monthly', 'quarterly', 'none'])
        group.add_argument(
            '--no-covariates', action='store_true', help='Train on the lags only.')
        group.add_argument('--epsilon', type=float, help='msMAPE smoothing. (Default: 0.1)')

    def _add_tree(self):
        group = self.cli.add_argument_group('tree')
        group.add_argument('--stopping', choices=['lin-test', 'error-red', 'both'])
        group.add_argument('--alpha0', type=float, help='Root significance level.')
        group.add_argument('--sig-divider', type=float, help='Significance decay per level.')
        group.add_argument('--error-threshold', type=float, help='Minimum SSE reduction.')
        group.add_argument('--max-depth', type=int)
        group.add_argument('--grid-size', type=int, help='Thresholds per column.')
        group.add_argument('--baseline', choices=['pr'], help='Train the pooled regression.')

    def _add_forest(self):
        group = self.cli.add_argument_group('forest')
        group.add_argument('--forest', action='store_true', help='run: train a forest.')
        group.add_argument('--trees', type=int)
        group.add_argument('--bagging-fraction', type=float)
        group.add_argument('--feature-fraction', type=float)
        group.add_argument('--randomize', choices=['significance', 'error-red', 'both'])
        group.add_argument('--combine', choices=['per-tree', 'per-step'])
        group.add_argument('--seed', type=int)

    def _add_simulate(self):
        group = self.cli.add_argument_group('simulate')
        group.add_argument('--kind', choices=['chaotic-logistic', 'mackey-glass', 'setar2'])
        group.add_argument('--n', dest='n_series', type=int, help='Number of series.')
        group.add_argument('--length', type=int)
        group.add_argument('--noise-sd', type=float)

    def _init_cli(self):
        self.logger.debug('Initializing CLI.')
        self.cli = argparse.ArgumentParser(prog='setar', description=__doc__)
        self.cli.add_argument(
            '--log-level',
            choices=['debug', 'info', 'warning', 'error', 'fatal'],
            help='Change logging level.'
        )
        self.cli.add_argument('--threads', type=int, help='Worker threads.')
        self._add_paths()
        self._add_data()
        self._add_tree()
        self._add_forest()
        self._add_simulate()
        command_opts = [cur['option'] for cur in self.global_config.commands]
        default_command = command_opts[0]
        self.cli.add_argument(
            'command',
            nargs='?',
            default=default_command,
            choices=command_opts,
            help='Command to run. (Default: {})'.format(default_command)
        )

    def _set_level(self, level_name):
        level = logging.getLevelName(level_name.upper())
        self.logger.setLevel(level)
        for handler in self.logger.handlers:
            handler.setLevel(level)
        self.logger.debug('Logger level reset to: {}'.format(level_name))

    def parse_args(self, argv=None):
        self.logger.debug('Parsing cli args.')
        self.args = self.cli.parse_args(argv)
        level_name = self.args.log_level or self.global_config.log_level
        if level_name is not None:
            self._set_level(level_name)
        self.command = self.args.command
        self.logger.debug('Command: {}'.format(self.command))

    def __call__(self, argv=None):
        try:
            self.parse_args(argv)
            config = setartree.pipeline.RunConfig.from_namespace(self.args)
            setartree.pipeline.run_pipeline(config, global_config=self.global_config)
        except setartree.shared.SetarError as exc:
            message = ' '.join(str(exc).split())
            sys.stderr.write(f'error[{exc.category}]: {message}\n')
            raise SystemExit(exc.exit_code)
        except OSError as exc:
            sys.stderr.write(f'error[io]: {exc}\n')
            raise SystemExit(setartree.shared.UsageError.exit_code)


def main(argv=None):
    cli_obj = SetarCli()
    cli_obj(argv)


if __name__ == '__main__':
    pass
