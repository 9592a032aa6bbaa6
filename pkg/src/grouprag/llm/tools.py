"""Tool registration, schema generation, and argument validation.

Tools are declared with a flat parameter universe (string, integer, number,
boolean, array-of-primitive, enum-of-strings) that serializes to the JSON
Schema object subset providers expect. Validation is closed: unknown fields
are rejected so a model hallucinating parameters fails loudly instead of
silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from ..errors import (
    DuplicateToolName,
    InvalidParameterDeclaration,
    MalformedJson,
    MissingRequired,
    TypeMismatch,
    UnknownField,
    UnknownTool,
)
from .messages import Message, Role, ToolCall

PRIMITIVE_TYPES = ("string", "integer", "number", "boolean")
PARAM_TYPES = PRIMITIVE_TYPES + ("array", "enum")


@dataclass(frozen=True)
class ToolParam:
    """One declared parameter. ``item_type`` applies to arrays, ``choices``
    to enums."""

    name: str
    type: str
    description: str = ""
    required: bool = True
    item_type: str | None = None
    choices: tuple[str, ...] = ()


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    params: tuple[ToolParam, ...] = ()

    def json_schema(self) -> dict:
        """JSON Schema (object subset) for the declared parameters."""
        properties: dict[str, dict] = {}
        required: list[str] = []
        for p in self.params:
            if p.type == "enum":
                prop: dict[str, Any] = {"type": "string", "enum": list(p.choices)}
            elif p.type == "array":
                prop = {"type": "array", "items": {"type": p.item_type}}
            else:
                prop = {"type": p.type}
            if p.description:
                prop["description"] = p.description
            properties[p.name] = prop
            if p.required:
                required.append(p.name)
        schema: dict[str, Any] = {
            "type": "object",
            "properties": properties,
            "additionalProperties": False,
        }
        if required:
            schema["required"] = required
        return schema


def _validate_declaration(params: Iterable[ToolParam]) -> tuple[ToolParam, ...]:
    out = []
    seen: set[str] = set()
    for p in params:
        if not p.name or not p.name.isidentifier():
            raise InvalidParameterDeclaration(f"bad parameter name: {p.name!r}")
        if p.name in seen:
            raise InvalidParameterDeclaration(f"duplicate parameter: {p.name}")
        seen.add(p.name)
        if p.type not in PARAM_TYPES:
            raise InvalidParameterDeclaration(
                f"parameter {p.name}: unsupported type {p.type!r} "
                f"(supported: {', '.join(PARAM_TYPES)})"
            )
        if p.type == "array":
            if p.item_type not in PRIMITIVE_TYPES:
                raise InvalidParameterDeclaration(
                    f"parameter {p.name}: arrays need a primitive item_type"
                )
        if p.type == "enum":
            if not p.choices or not all(isinstance(c, str) and c for c in p.choices):
                raise InvalidParameterDeclaration(
                    f"parameter {p.name}: enums need non-empty string choices"
                )
        out.append(p)
    return tuple(out)


class ToolRegistry:
    """Named tools plus their callables. Immutable once the app is wired up,
    so concurrent readers need no locking."""

    def __init__(self) -> None:
        self._tools: dict[str, tuple[ToolDescriptor, Callable[..., Any]]] = {}

    def register(
        self,
        name: str,
        description: str,
        params: Iterable[ToolParam],
        func: Callable[..., Any],
    ) -> ToolDescriptor:
        if name in self._tools:
            raise DuplicateToolName(f"tool {name!r} is already registered")
        descriptor = ToolDescriptor(
            name=name, description=description, params=_validate_declaration(params)
        )
        self._tools[name] = (descriptor, func)
        return descriptor

    def descriptor(self, name: str) -> ToolDescriptor:
        try:
            return self._tools[name][0]
        except KeyError:
            raise UnknownTool(f"no tool named {name!r}") from None

    def callable_for(self, name: str) -> Callable[..., Any]:
        try:
            return self._tools[name][1]
        except KeyError:
            raise UnknownTool(f"no tool named {name!r}") from None

    def descriptors(self) -> list[ToolDescriptor]:
        return [d for d, _ in self._tools.values()]

    def __contains__(self, name: str) -> bool:
        return name in self._tools


def _type_name(value: Any) -> str:
    return {str: "string", bool: "boolean", int: "integer", float: "number"}.get(
        type(value), type(value).__name__
    )


def _check_primitive(name: str, expected: str, value: Any) -> Any:
    if expected == "string":
        if not isinstance(value, str):
            raise TypeMismatch(name, "string", _type_name(value))
        return value
    if expected == "boolean":
        if not isinstance(value, bool):
            raise TypeMismatch(name, "boolean", _type_name(value))
        return value
    if expected == "integer":
        # bool is an int subclass in Python; JSON booleans are not integers.
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatch(name, "integer", _type_name(value))
        return value
    if expected == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeMismatch(name, "number", _type_name(value))
        return float(value)
    raise TypeMismatch(name, expected, _type_name(value))


def validate_tool_args(descriptor: ToolDescriptor, raw: str) -> dict[str, Any]:
    """Parse and validate raw JSON arguments against the descriptor.

    Returns typed values. Raises MalformedJson, MissingRequired, TypeMismatch
    or UnknownField; the first violation found wins.
    """
    try:
        parsed = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as e:
        raise MalformedJson(f"arguments are not valid JSON: {e}") from e
    if not isinstance(parsed, dict):
        raise MalformedJson(
            f"arguments must be a JSON object, got {_type_name(parsed)}"
        )
    declared = {p.name: p for p in descriptor.params}
    for key in parsed:
        if key not in declared:
            raise UnknownField(key)
    for p in descriptor.params:
        if p.required and p.name not in parsed:
            raise MissingRequired(p.name)

    typed: dict[str, Any] = {}
    for p in descriptor.params:
        if p.name not in parsed:
            continue
        value = parsed[p.name]
        if p.type == "enum":
            if not isinstance(value, str):
                raise TypeMismatch(p.name, "string (enum)", _type_name(value))
            if value not in p.choices:
                raise TypeMismatch(
                    p.name, f"one of {list(p.choices)}", repr(value)
                )
            typed[p.name] = value
        elif p.type == "array":
            if not isinstance(value, list):
                raise TypeMismatch(p.name, "array", _type_name(value))
            typed[p.name] = [
                _check_primitive(f"{p.name}[{i}]", p.item_type or "string", item)
                for i, item in enumerate(value)
            ]
        else:
            typed[p.name] = _check_primitive(p.name, p.type, value)
    return typed


def invoke_tool(registry: ToolRegistry, call: ToolCall) -> Message:
    """Run a tool call and wrap the outcome as a TOOL message.

    Every outcome, including unknown tools, bad arguments and exceptions
    inside the tool, becomes structured content so the conversation loop
    never dies on a tool failure.
    """
    if call.name not in registry:
        return _tool_error(call, "unknown_tool", f"no tool named {call.name!r}")
    descriptor = registry.descriptor(call.name)
    try:
        kwargs = validate_tool_args(descriptor, call.raw_arguments)
    except Exception as e:
        return _tool_error(call, "invalid_arguments", str(e))
    func = registry.callable_for(call.name)
    try:
        result = func(**kwargs)
    except Exception as e:  # containment: tool bugs stay inside the TOOL message
        return _tool_error(call, "tool_failed", f"{type(e).__name__}: {e}")
    try:
        content = json.dumps(result)
    except (TypeError, ValueError):
        content = json.dumps(str(result))
    return Message(role=Role.TOOL, content=content, tool_call_id=call.id)


def _tool_error(call: ToolCall, code: str, message: str) -> Message:
    body = json.dumps({"error": {"type": code, "message": message}})
    return Message(role=Role.TOOL, content=body, tool_call_id=call.id)
