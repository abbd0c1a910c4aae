from typing import Any, Callable, Sequence, TypeVar

from typing_extensions import Self

import pytreeclass as tc
from pytreeclass._src.code_build import (
    ArgKindType,
    Field,
    build_init_method,
    convert_hints_to_fields,
    dataclass_transform,
)
from pytreeclass._src.code_build import (
    field as tc_field,
)
from pytreeclass._src.tree_base import TreeClassIndexer

_MISSING: Any = object()


class ExtendedTreeClassIndexer(TreeClassIndexer):
    """Indexer that keeps the concrete tree class type for static checkers."""

    def __getitem__(self, where: Any) -> Self:
        return super().__getitem__(where)  # type: ignore


class TreeClass(tc.TreeClass):
    """Immutable record base class used for every transwave data type.

    Instances can only be modified during ``__init__``/``__post_init__``. Afterwards, updates are
    functional: :meth:`aset` returns a copy with one attribute replaced.
    """

    @property
    def at(self) -> ExtendedTreeClassIndexer:
        return super().at  # type: ignore

    def field_names(self) -> list[str]:
        """Names of all fields that are part of ``__init__``, in declaration order."""
        return [f.name for f in tc.fields(self) if f.init]

    def to_dict(self) -> dict[str, Any]:
        """Shallow mapping of init-field names to their current values."""
        return {name: getattr(self, name) for name in self.field_names()}

    def _aset(self, attr_name: str, val: Any):
        setattr(self, attr_name, val)

    @staticmethod
    def _parse_path(path: str) -> list[str]:
        if not path:
            raise ValueError("Empty attribute path is not valid")
        parts = path.split("->")
        for part in parts:
            if not part.isidentifier():
                raise ValueError(f"Invalid attribute name: '{part}' in path '{path}'")
        return parts

    def aset(self, attr_name: str, val: Any, create_new_ok: bool = False) -> Self:
        """Return a copy of this instance with one attribute replaced.

        Nested tree classes are addressed with ``->``, e.g. ``"config->a2"`` replaces ``a2`` on the
        ``config`` attribute of this instance. Unlike ``.at[...].set``, the full attribute is replaced, not
        only its array leaves.

        Args:
            attr_name (str): Attribute name or ``->``-separated attribute path.
            val (Any): New value.
            create_new_ok (bool, optional): If False (default), raise if the final attribute does not exist.

        Returns:
            Self: Updated copy.
        """
        parts = self._parse_path(attr_name)
        chain: list[TreeClass] = [self]
        for idx, part in enumerate(parts[:-1]):
            child = getattr(chain[-1], part, _MISSING)
            if not isinstance(child, TreeClass):
                raise AttributeError(f"'{'->'.join(parts[: idx + 1])}' is not a nested TreeClass attribute")
            chain.append(child)
        if not create_new_ok and not hasattr(chain[-1], parts[-1]):
            raise AttributeError(f"Attribute: {parts[-1]} does not exist for {chain[-1].__class__.__name__}")

        current = val
        for parent, part in zip(reversed(chain), reversed(parts)):
            _, current = parent.at["_aset"](part, current)
        return current


T = TypeVar("T")


def _build_field(
    default: Any,
    init: bool,
    repr: bool,
    kind: ArgKindType,
    metadata: dict[str, Any] | None,
    on_setattr: Sequence[Callable],
    on_getattr: Sequence[Callable],
    alias: str | None,
) -> Any:
    kwargs: dict[str, Any] = dict(
        init=init,
        repr=repr,
        kind=kind,
        metadata=metadata,
        on_setattr=on_setattr,
        on_getattr=on_getattr,
        alias=alias,
    )
    if default is not _MISSING:
        kwargs["default"] = default
    return tc_field(**kwargs)


def field(
    *,
    default: Any = _MISSING,
    init: bool = True,
    repr: bool = True,
    kind: ArgKindType = "KW_ONLY",
    metadata: dict[str, Any] | None = None,
    on_setattr: Sequence[Any] = (),
    on_getattr: Sequence[Any] = (),
    alias: str | None = None,
) -> Any:
    """A pytreeclass field whose value is a pytree leaf (arrays, nested tree classes).

    Args:
        default (Any, optional): Default value. Required field if omitted.
        init (bool, optional): Whether to include the field in __init__. Defaults to True.
        repr (bool, optional): Whether to include the field in __repr__. Defaults to True.
        kind (ArgKindType, optional): The argument kind. Defaults to KW_ONLY.
        metadata (dict[str, Any] | None, optional): Additional metadata for the field. Defaults to None.
        on_setattr (Sequence[Any], optional): Additional setattr callbacks. Defaults to no callbacks.
        on_getattr (Sequence[Any], optional): Additional getattr callbacks. Defaults to no callbacks.
        alias (str | None, optional): Alternative name for the field in __init__. Defaults to None

    Returns:
        Any: A Field instance
    """
    return _build_field(default, init, repr, kind, metadata, on_setattr, on_getattr, alias)


def frozen_field(
    *,
    default: Any = _MISSING,
    init: bool = True,
    repr: bool = True,
    kind: ArgKindType = "KW_ONLY",
    metadata: dict[str, Any] | None = None,
    on_setattr: Sequence[Any] = (),
    on_getattr: Sequence[Any] = (),
    alias: str | None = None,
) -> Any:
    """A field that is frozen on set and unfrozen on get, i.e. static metadata rather than a pytree leaf.

    Args:
        default (Any, optional): Default value. Required field if omitted.
        init (bool, optional): Whether to include the field in __init__. Defaults to True.
        repr (bool, optional): Whether to include the field in __repr__. Defaults to True.
        kind (ArgKindType, optional): The argument kind. Defaults to KW_ONLY.
        metadata (dict[str, Any] | None, optional): Additional metadata for the field. Defaults to None.
        on_setattr (Sequence[Any], optional): Additional setattr callbacks (applied after freezing).
        on_getattr (Sequence[Any], optional): Additional getattr callbacks (applied after unfreezing).
        alias (str | None, optional): Alternative name for the field in __init__. Defaults to None

    Returns:
        Any: A Field instance configured with freeze/unfreeze behavior
    """
    return _build_field(
        default,
        init,
        repr,
        kind,
        metadata,
        list(on_setattr) + [tc.freeze],
        [tc.unfreeze] + list(on_getattr),
        alias,
    )


@dataclass_transform(
    field_specifiers=(Field, tc_field, frozen_field, field),
    kw_only_default=True,
)
def autoinit(klass: type[T]) -> type[T]:
    """Wrapper around tc.autoinit that preserves parameter requirement information"""
    return klass if "__init__" in vars(klass) else build_init_method(convert_hints_to_fields(klass))
