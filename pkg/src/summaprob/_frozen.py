"""Frozen dataclasses that remember their hash.

Models, expressions and index sets are used as lru_cache keys on every
evaluator call. Rehashing a nested tree of Fractions each time dominated the
cost of a single ps_count, so the first hash is stored on the instance.
"""
from dataclasses import dataclass

_KEY = "_cached_hash"


def frozen(cls):
    cls = dataclass(frozen=True)(cls)
    plain = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__[_KEY]
        except KeyError:
            h = plain(self)
            object.__setattr__(self, _KEY, h)
            return h

    def __getstate__(self):  # caches are private; str hashes differ between processes
        return {k: v for k, v in self.__dict__.items() if not k.startswith("_")}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)

    cls.__hash__ = __hash__
    cls.__getstate__ = __getstate__
    cls.__setstate__ = __setstate__
    return cls
