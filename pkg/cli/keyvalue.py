"""
Key-Value Files
Parser for the `key = value` text format of scenario and schema files.
Dotted keys nest (`censoring.admin_time = 90`); `#` starts a comment.
"""

import json
import os
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Type

from pydantic import BaseModel, ValidationError

from core.errors import ConfigurationError, ScenarioParseError
from simulation.scenario import MechanismKind, Scenario

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


@dataclass
class KeyValueDocument:
    values: Dict[str, Any] = field(default_factory=dict)
    lines: Dict[str, int] = field(default_factory=dict)
    source: str = "<text>"

    def line_of(self, path: str) -> Optional[int]:
        """Line of the key itself, or of the first key below it"""
        if path in self.lines:
            return self.lines[path]
        nested = [line for key, line in self.lines.items() if key.startswith(path + ".")]
        return min(nested) if nested else None


def parse_key_value(text: str, source: str = "<text>") -> KeyValueDocument:
    """
    Parse key-value text into a nested dict

    Raises:
        ScenarioParseError: malformed line, bad key or duplicate key (with its line number)
    """
    document = KeyValueDocument(source=source)
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ScenarioParseError(f"{source}: expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split('=', 1))
        if ' #' in value:
            value = value.split(' #', 1)[0].rstrip()
        if not _KEY.match(key):
            raise ScenarioParseError(f"{source}: invalid key '{key}'", line=number, field=key)
        if key in document.lines:
            raise ScenarioParseError(f"{source}: duplicate key '{key}' (first on line {document.lines[key]})",
                                     line=number, field=key)

        target = document.values
        parts = key.split('.')
        for part in parts[:-1]:
            node = target.setdefault(part, {})
            if not isinstance(node, dict):
                raise ScenarioParseError(f"{source}: '{key}' nests under a plain value", line=number, field=key)
            target = node
        if isinstance(target.get(parts[-1]), dict):
            raise ScenarioParseError(f"{source}: '{key}' is also used as a section", line=number, field=key)
        target[parts[-1]] = value
        document.lines[key] = number
    return document


def _field_path(location) -> str:
    """Dotted field path of a pydantic error location, without union tags"""
    parts = [str(p) for p in location if not isinstance(p, int)]
    kinds = {kind.value for kind in MechanismKind}
    if len(parts) > 1 and parts[0] == 'mechanism' and parts[1] in kinds:
        parts.pop(1)
    return ".".join(parts)


def validate_document(model: Type[BaseModel], document: KeyValueDocument) -> BaseModel:
    """Validate a parsed document, pointing the first error at its file line"""
    try:
        return model.model_validate(document.values)
    except ValidationError as e:
        first = e.errors()[0]
        path = _field_path(first['loc'])
        line = document.line_of(path) if path else None
        raise ScenarioParseError(f"{document.source}: {path or 'document'}: {first['msg']}",
                                 line=line, field=path or None)


def read_text(path: str) -> str:
    if not os.path.exists(path):
        raise ConfigurationError(f"File not found: {path}", field=path)
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def load_scenario(path: str) -> Scenario:
    """Scenario from a key-value file; a missing name defaults to the file stem"""
    document = parse_key_value(read_text(path), source=path)
    if 'name' not in document.values:
        document.values['name'] = os.path.splitext(os.path.basename(path))[0]
    return validate_document(Scenario, document)


def load_mapping(path: str) -> KeyValueDocument:
    """Key-value or JSON file (by extension) as a document"""
    text = read_text(path)
    if path.lower().endswith('.json'):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioParseError(f"{path}: invalid JSON: {e.msg}", line=e.lineno)
        if not isinstance(values, dict):
            raise ScenarioParseError(f"{path}: expected a JSON object")
        return KeyValueDocument(values=values, source=path)
    return parse_key_value(text, source=path)


def dump_key_value(values: Dict[str, Any], prefix: str = "") -> str:
    """Inverse of parse_key_value for flat or nested dicts of scalars and lists"""
    lines = []
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(dump_key_value(value, prefix=name + ".").rstrip("\n"))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{name} = {', '.join(str(v) for v in value)}")
        elif value is None:
            continue
        else:
            lines.append(f"{name} = {value}")
    return "\n".join(line for line in lines if line) + "\n"
