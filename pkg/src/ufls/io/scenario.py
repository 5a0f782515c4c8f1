"""Scenario text parsing, inheritance, overrides and validation."""

from __future__ import annotations

import copy
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from ufls.errors import ProfileError, ScenarioSyntaxError, ScenarioValidationError
from ufls.io.profiles import LoadProfileSet, load_profiles, synth_profiles
from ufls.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def _load_yaml(text: str, source: str = "<scenario>") -> dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        column = mark.column + 1 if mark is not None else 1
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioSyntaxError(f"{source}: {problem}", line, column) from exc
    if data is None:
        raise ScenarioSyntaxError(f"{source}: empty scenario", 1, 1)
    if not isinstance(data, dict):
        raise ScenarioSyntaxError(f"{source}: top level must be a mapping", 1, 1)
    return data


def deep_merge(base: dict[str, Any], overlay: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge mappings; lists and scalars in ``overlay`` replace ``base``."""
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _resolve_base(data: dict[str, Any], base_dir: Path | None, seen: tuple[Path, ...] = ()) -> dict[str, Any]:
    base_ref = data.pop("base", None)
    if base_ref is None:
        return data
    path = Path(base_ref)
    if not path.is_absolute():
        path = (base_dir or Path.cwd()) / path
    path = path.resolve()
    if path in seen:
        raise ScenarioValidationError([f"base: inheritance cycle through {path.name}"])
    if not path.exists():
        raise ScenarioValidationError([f"base: file not found: {path}"])
    parent = _load_yaml(path.read_text(encoding="utf-8"), path.name)
    parent = _resolve_base(parent, path.parent, (*seen, path))
    return deep_merge(parent, data)


def parse_override(item: str) -> tuple[list[str], Any]:
    """Split ``a.b.c=value`` into a key path and a YAML-parsed value."""
    key, sep, raw = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ScenarioValidationError([f"override {item!r}: expected key=value"])
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError:
        value = raw
    return key.split("."), value


def apply_overrides(data: dict[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    out = copy.deepcopy(data)
    for item in overrides:
        path, value = parse_override(item)
        node: Any = out
        for part in path[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(part)]
                except (ValueError, IndexError):
                    raise ScenarioValidationError([f"override {item!r}: no list index {part!r}"]) from None
            else:
                node = node.setdefault(part, {})
                if not isinstance(node, dict | list):
                    raise ScenarioValidationError([f"override {item!r}: {part!r} is not a section"])
        last = path[-1]
        if isinstance(node, list):
            try:
                node[int(last)] = value
            except (ValueError, IndexError):
                raise ScenarioValidationError([f"override {item!r}: no list index {last!r}"]) from None
        else:
            node[last] = value
        logger.debug("override %s -> %r", ".".join(path), value)
    return out


def _format_pydantic(exc: ValidationError) -> list[str]:
    out = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


# rounds of dropping schema-invalid entries before giving up on cross-reference checks
_PRUNE_ROUNDS = 8


def _walk(node: Any, path: tuple[Any, ...]) -> Any:
    for part in path:
        if isinstance(node, list) and isinstance(part, int) and 0 <= part < len(node):
            node = node[part]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            return None
    return node


def _drop_invalid(data: dict[str, Any], exc: ValidationError) -> tuple[dict[str, Any], set[str]] | None:
    """Copy of ``data`` without the list items and optional keys that failed schema validation.

    Returns the pruned copy and the ids and sectionalizer ids of dropped list
    items, or None when an error cannot be removed this way (a missing required
    key or a model-level check).
    """
    out = copy.deepcopy(data)
    items: dict[tuple[Any, ...], set[int]] = {}
    keys: list[tuple[Any, ...]] = []
    for err in exc.errors():
        loc = tuple(err["loc"])
        positions = [i for i, part in enumerate(loc) if isinstance(part, int)]
        if positions:
            items.setdefault(loc[: positions[-1]], set()).add(loc[positions[-1]])
        elif loc and err["type"] != "missing":
            keys.append(loc)
        else:
            return None

    dropped: set[str] = set()
    changed = False
    for path in sorted(items, key=len, reverse=True):
        node = _walk(out, path)
        if not isinstance(node, list):
            continue
        for i in sorted(items[path], reverse=True):
            if i < len(node):
                item = node.pop(i)
                changed = True
                if isinstance(item, dict):
                    dropped.update(str(item[k]) for k in ("id", "sectionalizer") if isinstance(item.get(k), str))
    for loc in keys:
        parent = _walk(out, loc[:-1])
        if isinstance(parent, dict) and loc[-1] in parent:
            del parent[loc[-1]]
            changed = True
    return (out, dropped) if changed else None


def _mentions(problem: str, ids: set[str]) -> bool:
    return any(repr(i) in problem or f".{i}." in problem or f".{i}:" in problem for i in ids)


def _partial_problems(data: dict[str, Any], exc: ValidationError) -> list[str]:
    """Cross-reference problems of what remains once schema-invalid entries are dropped."""
    dropped: set[str] = set()
    for _ in range(_PRUNE_ROUNDS):
        pruned = _drop_invalid(data, exc)
        if pruned is None:
            return []
        data, ids = pruned
        dropped |= ids
        try:
            config = ScenarioConfig.model_validate(data)
        except ValidationError as again:
            exc = again
            continue
        problems = config.problems()
        if config.profiles.csv is not None:
            problems += _csv_problems(config)
        return [p for p in problems if not _mentions(p, dropped)]
    return []


def _csv_problems(config: ScenarioConfig) -> list[str]:
    path = Path(config.profiles.csv)
    if not path.exists():
        return [f"profiles.csv: file not found: {path}"]
    try:
        profiles = load_profiles(path.read_text(encoding="utf-8"))
    except ProfileError as exc:
        return [f"profiles.csv: {exc}"]
    errors = []
    for d in config.devices:
        if d.profile is not None and d.profile not in profiles:
            errors.append(f"devices.{d.id}.profile: unknown profile {d.profile!r}")
    for name in profiles.ids:
        times, _ = profiles.series[name]
        if times[0] > 0.0:
            errors.append(f"profiles.csv: profile {name!r} starts at t = {times[0]:g} s, after the run starts")
    return errors


def parse_scenario(
    text: str,
    base_dir: Path | None = None,
    overrides: Iterable[str] = (),
    seed: int | None = None,
) -> ScenarioConfig:
    """Parse, resolve and validate scenario text.

    Args:
        text: YAML scenario.
        base_dir: Directory for resolving ``base:`` and ``profiles.csv`` paths.
        overrides: Dotted ``key=value`` assignments applied before validation.
        seed: Replaces the scenario seed when given.

    Raises:
        ScenarioSyntaxError: Text is not a YAML mapping (line/column attached).
        ScenarioValidationError: Every schema, reference and bound problem found.
    """
    data = _load_yaml(text)
    data = _resolve_base(data, base_dir)
    data = apply_overrides(data, overrides)
    if seed is not None:
        data["seed"] = seed

    profiles = data.get("profiles")
    if isinstance(profiles, dict) and isinstance(profiles.get("csv"), str):
        csv_path = Path(profiles["csv"])
        if not csv_path.is_absolute():
            csv_path = (base_dir or Path.cwd()) / csv_path
        profiles["csv"] = str(csv_path.resolve())

    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ScenarioValidationError(_format_pydantic(exc) + _partial_problems(data, exc)) from None

    errors = config.problems()
    if config.profiles.csv is not None:
        errors += _csv_problems(config)
    if errors:
        raise ScenarioValidationError(errors)
    logger.debug("scenario %s resolved (fingerprint %s)", config.name, config.fingerprint())
    return config


def load_scenario(path: Path, overrides: Iterable[str] = (), seed: int | None = None) -> ScenarioConfig:
    """Read and parse a scenario file; relative references resolve next to it."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_scenario(text, base_dir=path.parent, overrides=overrides, seed=seed)


def dump_scenario(config: ScenarioConfig) -> str:
    """Serialize a resolved scenario back to YAML text."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def scenario_profiles(config: ScenarioConfig) -> LoadProfileSet:
    """Load or synthesize the profiles a resolved scenario refers to."""
    source = config.profiles
    if source.synth is not None:
        return synth_profiles(source.synth, horizon=config.horizon)
    if source.csv is not None:
        return load_profiles(Path(source.csv).read_text(encoding="utf-8"))
    return LoadProfileSet()
