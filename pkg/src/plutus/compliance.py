"""README structure checker for the PLUTUS reproducibility standard.

The checker reads a repository's README.md, collects its level-1 and
level-2 headings, and matches each rule against them by normalized title.
The score is the fraction of required sections that are present with a
non-empty body.  That formula is a declared placeholder: the standard names
a compliance score but publishes no rubric weights.
"""

from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .errors import DataFileNotFound, SchemaError

PRESENT = "present"
MISSING = "missing"
EMPTY = "empty"
NO_README = "NoReadme"

SCORE_NOTE = "score = required sections present / required sections (placeholder rubric)"

RULE_COLUMNS = ("name", "required", "aliases", "step_tag")


@dataclass(frozen=True)
class SectionRule:
    name: str
    required: bool
    aliases: tuple[str, ...] = ()
    step_tag: Optional[str] = None

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("rule name must be non-empty")

    def keys(self) -> set[str]:
        return {normalize_title(t) for t in (self.name, *self.aliases)}


@dataclass(frozen=True)
class Finding:
    rule: str
    status: str
    required: bool
    detail: str = ""


@dataclass(frozen=True)
class ComplianceReport:
    repo_path: str
    findings: tuple[Finding, ...]
    score: float
    required_missing: int
    readme: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.readme is not None and self.required_missing == 0

    def to_text(self) -> str:
        lines = [
            f"PLUTUS compliance report for {self.repo_path}",
            f"# {SCORE_NOTE}",
            f"readme: {self.readme or 'not found'}",
        ]
        for f in self.findings:
            tag = "required" if f.required else "optional"
            lines.append(f"  [{f.status:>7}] {f.rule} ({tag}){'  ' + f.detail if f.detail else ''}")
        lines.append(f"score: {self.score!r}")
        lines.append(f"required_missing: {self.required_missing}")
        return "\n".join(lines) + "\n"

    def as_items(self) -> list[tuple[str, str]]:
        items = [
            ("repo", self.repo_path),
            ("readme", self.readme or ""),
            ("score", repr(self.score)),
            ("required_missing", str(self.required_missing)),
        ]
        for f in self.findings:
            items.append((f"section.{normalize_title(f.rule).replace(' ', '_')}", f.status))
        return items


def normalize_title(text: str) -> str:
    """Case- and punctuation-insensitive key for a heading.

    ``"Backtesting \\& Optimization"`` and ``"backtesting and optimization"``
    normalize to the same key.  Parenthesized suffixes such as ``(Step 1)``
    and leading section numbers are dropped.
    """
    text = unicodedata.normalize("NFKC", text).lower()
    text = text.replace("\\&", "&").replace("&", " and ")
    text = re.sub(r"\([^)]*\)", " ", text)
    text = re.sub(r"[^\w\s]", " ", text)
    text = re.sub(r"^\s*\d+(\s+\d+)*\s+", "", text)
    return " ".join(text.split())


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in {"true", "yes", "1"}:
        return True
    if value in {"false", "no", "0"}:
        return False
    raise SchemaError(f"bad boolean {text!r}")


def load_ruleset(path) -> list[SectionRule]:
    """Read a ruleset CSV with columns ``name,required,aliases,step_tag``.

    Aliases are ``|``-separated; an empty ``step_tag`` means none.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFound(f"no such ruleset: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return _parse_rules(fh.read(), str(path))


def _parse_rules(text: str, origin: str) -> list[SectionRule]:
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != RULE_COLUMNS:
        raise SchemaError(f"{origin}: expected header {','.join(RULE_COLUMNS)}")
    rules = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(RULE_COLUMNS):
            raise SchemaError(f"{origin}: bad rule row {row}")
        name, required, aliases, step = (c.strip() for c in row)
        rules.append(SectionRule(
            name=name,
            required=_parse_bool(required),
            aliases=tuple(a.strip() for a in aliases.split("|") if a.strip()),
            step_tag=step or None,
        ))
    return rules


def default_ruleset() -> list[SectionRule]:
    text = resources.files("plutus").joinpath("data/default_rules.csv").read_text(encoding="utf-8")
    return _parse_rules(text, "default_rules.csv")


_ATX = re.compile(r"^ {0,3}(#{1,6})[ \t]+(.*?)[ \t#]*$")
_FENCE = re.compile(r"^ {0,3}(```|~~~)")


def extract_sections(markdown: str) -> list[tuple[str, str]]:
    """``(heading, body)`` pairs for level-1 and level-2 ATX headings.

    A body runs to the next level-1/2 heading and excludes deeper heading
    lines themselves.  Fenced code blocks are not scanned for headings.
    """
    sections: list[tuple[str, list[str]]] = []
    in_fence = False
    for line in markdown.splitlines():
        if _FENCE.match(line):
            in_fence = not in_fence
            if sections:
                sections[-1][1].append(line)
            continue
        m = None if in_fence else _ATX.match(line)
        if m and len(m.group(1)) <= 2:
            sections.append((m.group(2).strip(), []))
        elif sections and not m:
            sections[-1][1].append(line)
    return [(title, "\n".join(body).strip()) for title, body in sections]


def find_readme(path) -> Optional[Path]:
    candidates = sorted(p for p in Path(path).iterdir() if p.is_file() and p.name.lower() == "readme.md")
    return candidates[0] if candidates else None


def check_repo(path, rules: Optional[Sequence[SectionRule]] = None) -> ComplianceReport:
    root = Path(path)
    if not root.is_dir():
        raise DataFileNotFound(f"no such directory: {root}")
    rules = list(default_ruleset() if rules is None else rules)
    n_required = sum(r.required for r in rules)

    readme = find_readme(root)
    if readme is None:
        findings = [Finding(NO_README, MISSING, True, "README.md not found")]
        findings += [Finding(r.name, MISSING, r.required) for r in rules]
        return ComplianceReport(str(root), tuple(findings), 0.0, n_required, None)

    sections = extract_sections(readme.read_text(encoding="utf-8"))
    keyed = [(normalize_title(title), body) for title, body in sections]
    findings = []
    present = 0
    for rule in rules:
        keys = rule.keys()
        bodies = [body for key, body in keyed if key in keys]
        if not bodies:
            status = MISSING
        elif any(bodies):
            status = PRESENT
        else:
            status = EMPTY
        if rule.required and status == PRESENT:
            present += 1
        findings.append(Finding(rule.name, status, rule.required))
    score = present / n_required if n_required else 1.0
    return ComplianceReport(str(root), tuple(findings), score, n_required - present, readme.name)
