"""Hierarchical, immutable state.

Every module owns a :class:`State` node holding named slots; the workflow owns
the root. Nodes are persistent values: ``update`` and :func:`state_merge`
return new trees and share untouched sub-trees with the input.
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Union

import numpy as np

from evoflow.errors import ConfigurationError, InvalidArgument, PathNotFound
from evoflow.rng import Key, key_split

StatePath = tuple[str, ...]
ROOT = "workflow"


def _freeze(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        if not value.flags.writeable and value.base is None:
            return value
        arr = np.array(value, copy=True, order="C")
        arr.setflags(write=False)
        return arr
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if value is None or isinstance(value, (str, Key, State)):
        return value
    if isinstance(value, (tuple, list)):
        return tuple(_freeze(v) for v in value)
    raise InvalidArgument(f"unsupported state value of type {type(value).__name__}")


class State:
    """Immutable node of the universal state tree."""

    __slots__ = ("_name", "_slots", "_children")

    def __init__(
        self,
        name: str = ROOT,
        slots: Mapping[str, Any] | None = None,
        children: Mapping[str, State] | None = None,
    ):
        kids = dict(children or {})
        for key, child in kids.items():
            if not isinstance(child, State):
                raise InvalidArgument(f"child {key!r} is not a State")
            if child.name != key:
                raise InvalidArgument(f"child stored under {key!r} is named {child.name!r}")
        object.__setattr__(self, "_name", name)
        object.__setattr__(self, "_slots", {k: _freeze(v) for k, v in (slots or {}).items()})
        object.__setattr__(self, "_children", kids)

    def __setattr__(self, key, value):
        raise AttributeError("State is immutable; use update()")

    def __reduce__(self):
        return (State, (self._name, dict(self._slots), dict(self._children)))

    @property
    def name(self) -> str:
        return self._name

    @property
    def slots(self) -> Mapping[str, Any]:
        return MappingProxyType(self._slots)

    @property
    def children(self) -> Mapping[str, State]:
        return MappingProxyType(self._children)

    def __getitem__(self, key: str) -> Any:
        try:
            return self._slots[key]
        except KeyError:
            raise PathNotFound(f"no slot {key!r} in state {self._name!r}") from None

    def __contains__(self, key: str) -> bool:
        return key in self._slots

    def get(self, key: str, default: Any = None) -> Any:
        return self._slots.get(key, default)

    def child(self, name: str) -> State:
        try:
            return self._children[name]
        except KeyError:
            raise PathNotFound(f"no child {name!r} under {self._name!r}") from None

    def update(self, **values: Any) -> State:
        slots = dict(self._slots)
        slots.update(values)
        return State(self._name, slots, self._children)

    def replace_child(self, child: State) -> State:
        if child.name not in self._children:
            raise PathNotFound(f"no child {child.name!r} under {self._name!r}")
        kids = dict(self._children)
        kids[child.name] = child
        return State(self._name, self._slots, kids)

    def to_bytes(self) -> bytes:
        """Canonical serialization: slots and children ordered by name."""
        out = bytearray()
        _encode_state(self, out)
        return bytes(out)

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self is other or self.to_bytes() == other.to_bytes()

    __hash__ = None

    def __repr__(self):
        return f"State({self._name!r}, slots={sorted(self._slots)}, children={sorted(self._children)})"


def _encode_str(s: str, out: bytearray) -> None:
    raw = s.encode()
    out += struct.pack("<I", len(raw))
    out += raw


def _encode_value(v: Any, out: bytearray) -> None:
    if v is None:
        out += b"N"
    elif isinstance(v, bool):
        out += b"B" + (b"\x01" if v else b"\x00")
    elif isinstance(v, int):
        out += b"I"
        _encode_str(str(v), out)
    elif isinstance(v, float):
        out += b"F" + struct.pack("<d", v)
    elif isinstance(v, str):
        out += b"S"
        _encode_str(v, out)
    elif isinstance(v, Key):
        out += b"K" + struct.pack("<QQ", v.hi, v.lo)
    elif isinstance(v, np.ndarray):
        out += b"A"
        _encode_str(v.dtype.newbyteorder("<").str, out)
        out += struct.pack("<I", v.ndim)
        out += struct.pack(f"<{v.ndim}Q", *v.shape)
        out += np.ascontiguousarray(v, dtype=v.dtype.newbyteorder("<")).tobytes()
    elif isinstance(v, tuple):
        out += b"T" + struct.pack("<I", len(v))
        for item in v:
            _encode_value(item, out)
    elif isinstance(v, State):
        out += b"X"
        _encode_state(v, out)
    else:  # pragma: no cover - _freeze rejects everything else
        raise InvalidArgument(f"cannot serialize {type(v).__name__}")


def _encode_state(s: State, out: bytearray) -> None:
    _encode_str(s.name, out)
    out += struct.pack("<I", len(s._slots))
    for key in sorted(s._slots):
        _encode_str(key, out)
        _encode_value(s._slots[key], out)
    out += struct.pack("<I", len(s._children))
    for key in sorted(s._children):
        _encode_state(s._children[key], out)


SetupResult = Union[State, Mapping[str, Any]]


@dataclass
class ModuleNode:
    """A module in the dependency tree: a name, a setup function and sub-modules."""

    name: str
    setup: Callable[[Key], SetupResult]
    children: list[ModuleNode] = field(default_factory=list)


def as_path(path: str | Iterable[str]) -> StatePath:
    if isinstance(path, str):
        path = path.split("/")
    path = tuple(path)
    if not path:
        raise InvalidArgument("state path must be non-empty")
    return path


def state_init(root: ModuleNode, key: Key) -> State:
    """Build the universal state by a depth-first walk of the module tree.

    Each node splits its key into one key for its own ``setup`` followed by
    one key per child, in child order.
    """
    names = [c.name for c in root.children]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigurationError(f"duplicate sibling module names under {root.name!r}: {dupes}")
    keys = key_split(key, len(root.children) + 1)
    own = root.setup(keys[0])
    slots = own.slots if isinstance(own, State) else (own or {})
    children = {c.name: state_init(c, k) for c, k in zip(root.children, keys[1:])}
    return State(root.name, slots, children)


def state_extract(universal: State, path: str | Sequence[str]) -> State:
    path = as_path(path)
    if path[0] != universal.name:
        raise PathNotFound(f"path {'/'.join(path)!r} does not start at root {universal.name!r}")
    node = universal
    for seg in path[1:]:
        if seg not in node.children:
            raise PathNotFound(f"path {'/'.join(path)!r} not found (missing {seg!r})")
        node = node.children[seg]
    return node


def state_merge(universal: State, path: str | Sequence[str], updated: State) -> State:
    """Return a new tree with the node at ``path`` replaced by ``updated``."""
    path = as_path(path)
    state_extract(universal, path)
    if updated.name != path[-1]:
        raise InvalidArgument(f"state named {updated.name!r} cannot be merged at {'/'.join(path)!r}")
    if len(path) == 1:
        return updated

    def rebuild(node: State, rest: StatePath) -> State:
        if len(rest) == 1:
            return node.replace_child(updated)
        return node.replace_child(rebuild(node.children[rest[0]], rest[1:]))

    return rebuild(universal, path[1:])
