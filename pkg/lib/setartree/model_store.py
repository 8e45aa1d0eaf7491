"""
Saving and loading trained models as versioned YAML documents.
"""
import dataclasses
import enum
import logging
import pathlib
import typing

import yaml

import setartree.setar_forest
import setartree.setar_tree
import setartree.shared

_LOGGER = logging.getLogger(__name__)

MODEL_FORMAT = 'setartree-model'
FORMAT_VERSION = 1


class ModelFormatError(setartree.shared.DataError):
    pass


class ModelKind(enum.Enum):
    tree = 'tree'
    forest = 'forest'
    pr = 'pr'


@dataclasses.dataclass(frozen=True)
class StoredModel:
    kind: ModelKind
    # A SetarTree for tree and pr models, a SetarForest for forests.
    model: typing.Any
    horizon: typing.Optional[int] = None

    @property
    def n_lags(self):
        return self._first_tree().n_lags

    @property
    def covariate_specs(self):
        return self._first_tree().covariate_specs

    def _first_tree(self):
        if self.kind is ModelKind.forest:
            return self.model.trees[0]
        return self.model

    def to_record(self):
        return {
            'format': MODEL_FORMAT,
            'format_version': FORMAT_VERSION,
            'kind': self.kind.value,
            'horizon': self.horizon,
            'model': self.model.to_record(),
        }

    @classmethod
    def from_record(cls, record):
        if not isinstance(record, dict) or record.get('format') != MODEL_FORMAT:
            raise ModelFormatError('Not a setartree model file')
        version = record.get('format_version')
        if version != FORMAT_VERSION:
            raise ModelFormatError(f'Unsupported model format version: {version}')
        try:
            kind = ModelKind(record['kind'])
        except (KeyError, ValueError):
            raise ModelFormatError(f'Unknown model kind: {record.get("kind")}')
        try:
            if kind is ModelKind.forest:
                model = setartree.setar_forest.SetarForest.from_record(record['model'])
            else:
                model = setartree.setar_tree.SetarTree.from_record(record['model'])
        except (KeyError, TypeError, ValueError, setartree.shared.SetarError) as exc:
            raise ModelFormatError(f'Malformed {kind.value} model: {exc}')
        return cls(kind=kind, model=model, horizon=record.get('horizon'))


def summarize_tree(tree):
    summary = tree.training_summary
    return {
        'depth': summary.depth,
        'leaf_count': summary.leaf_count,
        'rows_per_leaf': list(summary.rows_per_leaf),
        'splits': [
            {'depth': depth, 'column': column, 'threshold': threshold}
            for depth, column, threshold in tree.splits()
        ],
    }


def summarize(stored):
    """Depth, leaves and splits; one entry per tree for forests."""
    record = {
        'kind': stored.kind.value,
        'n_lags': stored.n_lags,
        'horizon': stored.horizon,
    }
    if stored.kind is ModelKind.forest:
        record['trees'] = [summarize_tree(cur) for cur in stored.model.trees]
    else:
        record.update(summarize_tree(stored.model))
    return record


def dump_yaml(record):
    return yaml.dump(record, indent=2, default_flow_style=False, sort_keys=False)


def save_model(stored, path):
    path = pathlib.Path(path)
    setartree.shared.atomic_write(path, dump_yaml(stored.to_record()))
    _LOGGER.info('Saved %s model: %s', stored.kind.value, path)


def load_model(path):
    path = pathlib.Path(path)
    if not path.exists():
        raise setartree.shared.UsageError(f'Model file does not exist: {path}')
    _LOGGER.debug('Loading model: %s', path)
    with path.open('r', encoding='utf-8') as fp:
        try:
            record = yaml.safe_load(fp)
        except yaml.YAMLError as exc:
            raise ModelFormatError(f'Cannot parse model file {path}: {exc}')
    return StoredModel.from_record(record)


if __name__ == '__main__':
    pass
