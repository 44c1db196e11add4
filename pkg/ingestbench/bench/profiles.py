"""名前付きハードウェアプロファイルの読み込みです。
`<name>.profile` ファイルは `[resources]` 節だけを持つ実行設定と同じ形式です。
INGESTBENCH_PROFILE_DIR があればそちらを同梱ディレクトリより先に探します。
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import List

from ingestbench.bench.config import RESOURCE_KEYS, _build, _convert, read_sections
from ingestbench.constants import PROFILE_DIR_ENV
from ingestbench.core import ResourceProfile
from ingestbench.errors import ConfigError, UnknownKey

PROFILE_SUFFIX = ".profile"
BUILTIN_PROFILE_DIR = Path(__file__).resolve().parent.parent / "profiles"


def profile_dirs() -> List[Path]:
    dirs: List[Path] = []
    extra = os.getenv(PROFILE_DIR_ENV, "").strip()
    if extra:
        dirs.append(Path(extra))
    dirs.append(BUILTIN_PROFILE_DIR)
    return dirs


def available_profiles() -> List[str]:
    names = set()
    for directory in profile_dirs():
        if directory.is_dir():
            names.update(p.name[: -len(PROFILE_SUFFIX)] for p in directory.glob(f"*{PROFILE_SUFFIX}"))
    return sorted(names)


def parse_profile(text: str, name: str) -> ResourceProfile:
    sections = read_sections(text)
    for section in sections:
        if section.name != "resources":
            raise UnknownKey(f"profile {name}: unexpected section [{section.name}]", key=section.name, line=section.line)
    if not sections:
        return ResourceProfile(name=name)
    section = sections[0]
    values = _convert(section, RESOURCE_KEYS)
    if "profile" in values:
        raise UnknownKey(f"profile {name}: profiles cannot nest", key="profile", line=section.entries["profile"][1])
    return _build(section, ResourceProfile, name=name, **values)


def load_profile(name: str) -> ResourceProfile:
    for directory in profile_dirs():
        path = directory / f"{name}{PROFILE_SUFFIX}"
        if path.is_file():
            return parse_profile(path.read_text(encoding="utf-8"), name)
    raise ConfigError(f"unknown resource profile {name!r}", key="profile")
