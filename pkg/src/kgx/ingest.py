"""Knowledge-base construction from line-delimited record files.

Publication records and thesaurus entries arrive as JSON objects, one per
line.  Malformed corpus lines are collected into an error report rather
than aborting the run; the thesaurus, being a curated vocabulary, is
parsed strictly.

Population is deterministic: nodes are inserted sorted by id and edges
sorted by (src, type, dst), so ingesting the same inputs twice produces
bytewise-identical snapshots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import (
    AllRecordsInvalidError,
    CycleDetectedError,
    DuplicateIdError,
    EmptyContentError,
    FileUnreadableError,
    StoreNotEmptyError,
)
from .graph import PropertyGraph
from .retrieval import tokenize
from .snapshot import Chunk


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    title: str
    year: int
    abstract: str | None = None
    introduction: str | None = None
    conclusion: str | None = None
    doi: str | None = None
    authors: tuple[tuple[str, str], ...] = ()  # (author_id, name)
    keywords: tuple[str, ...] = ()
    journal: str | None = None
    projects: tuple[str, ...] = ()
    software: tuple[str, ...] = ()
    datasets: tuple[str, ...] = ()
    research_units: tuple[tuple[str, str], ...] = ()  # (unit_id, region)
    citations_count: int = 0
    open_access: bool = False


def _parse_record(obj: object, line_no: int) -> PublicationRecord:
    def fail(message: str) -> None:
        raise ValueError(f"line {line_no}: {message}")

    if not isinstance(obj, dict):
        fail("record is not an object")
    assert isinstance(obj, dict)

    record_id = obj.get("id")
    if not isinstance(record_id, str) or not record_id:
        fail("missing or empty 'id'")

    year = obj.get("year")
    if not isinstance(year, int) or isinstance(year, bool):
        fail("missing or non-integer 'year'")
    if not 1900 <= year <= 2100:
        fail(f"'year' {year} outside [1900, 2100]")

    citations = obj.get("citations_count", 0)
    if not isinstance(citations, int) or isinstance(citations, bool) or citations < 0:
        fail("'citations_count' must be a non-negative integer")

    open_access = obj.get("open_access", False)
    if not isinstance(open_access, bool):
        fail("'open_access' must be a boolean")

    def opt_str(key: str) -> str | None:
        value = obj.get(key)
        if value is not None and not isinstance(value, str):
            fail(f"'{key}' must be a string")
        return value

    def str_list(key: str) -> tuple[str, ...]:
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            fail(f"'{key}' must be a list of strings")
        return tuple(value)

    def pair_list(key: str, first: str, second: str) -> tuple[tuple[str, str], ...]:
        value = obj.get(key, [])
        if not isinstance(value, list):
            fail(f"'{key}' must be a list")
        pairs = []
        for item in value:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get(first), str)
                or not isinstance(item.get(second), str)
            ):
                fail(f"'{key}' entries must be objects with '{first}' and '{second}'")
            pairs.append((item[first], item[second]))
        return tuple(pairs)

    return PublicationRecord(
        id=record_id,
        title=obj.get("title", "") if isinstance(obj.get("title", ""), str) else "",
        year=year,
        abstract=opt_str("abstract"),
        introduction=opt_str("introduction"),
        conclusion=opt_str("conclusion"),
        doi=opt_str("doi"),
        authors=pair_list("authors", "author_id", "name"),
        keywords=str_list("keywords"),
        journal=opt_str("journal"),
        projects=str_list("projects"),
        software=str_list("software"),
        datasets=str_list("datasets"),
        research_units=pair_list("research_units", "unit_id", "region"),
        citations_count=citations,
        open_access=open_access,
    )


def load_corpus(
    path: str | Path,
    *,
    year_window: tuple[int, int] | None = None,
) -> tuple[list[PublicationRecord], list[str]]:
    """Parse a corpus file; returns (records in file order, error report).

    Bad lines are reported by line number, never fatal — unless every line
    is bad, which raises AllRecordsInvalid.  Records outside the year
    window are dropped silently (they are valid, just out of scope).
    """
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read corpus file {path}: {exc}") from exc

    records: list[PublicationRecord] = []
    errors: list[str] = []
    saw_line = False
    valid = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        saw_line = True
        try:
            record = _parse_record(json.loads(line), line_no)
        except ValueError as exc:  # includes json.JSONDecodeError
            message = str(exc)
            if not message.startswith("line "):
                message = f"line {line_no}: {message}"
            errors.append(message)
            continue
        valid += 1
        if year_window is not None and not (
            year_window[0] <= record.year <= year_window[1]
        ):
            continue
        records.append(record)

    if saw_line and valid == 0:
        raise AllRecordsInvalidError(
            f"no valid records in {path} ({len(errors)} errors; first: {errors[0]})"
        )
    return records, errors


def build_chunk(record: PublicationRecord) -> Chunk:
    """Concatenate title, abstract, introduction, conclusion; skip absent parts."""
    if not record.title or not record.title.strip():
        raise EmptyContentError(f"record {record.id!r} has an empty title")
    sections = (record.title, record.abstract, record.introduction, record.conclusion)
    parts = [part for part in sections if part and part.strip()]
    text = "\n\n".join(parts)
    return Chunk(chunk_id=record.id, text=text, token_count=len(tokenize(text)))


@dataclass(frozen=True)
class ThesaurusEntry:
    concept_id: str
    preferred_label: str
    alternate_labels: tuple[str, ...] = ()
    broader: str | None = None
    is_domain: bool = False


class Thesaurus:
    """Controlled vocabulary: Domain roots and Concept leaves under them."""

    def __init__(self, entries: Sequence[ThesaurusEntry]):
        self.entries = list(entries)
        self.by_id: dict[str, ThesaurusEntry] = {}
        for entry in self.entries:
            if entry.concept_id in self.by_id:
                raise ValueError(f"duplicate thesaurus id {entry.concept_id!r}")
            self.by_id[entry.concept_id] = entry
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        for entry in self.entries:
            chain = [entry.concept_id]
            seen = {entry.concept_id}
            current = entry
            while current.broader is not None:
                parent = self.by_id.get(current.broader)
                if parent is None:
                    break  # dangling parents leave the concept domainless
                if parent.concept_id in seen:
                    chain.append(parent.concept_id)
                    raise CycleDetectedError(
                        "broader chain cycles: " + " -> ".join(chain)
                    )
                chain.append(parent.concept_id)
                seen.add(parent.concept_id)
                current = parent

    def concepts(self) -> list[ThesaurusEntry]:
        return [e for e in self.entries if not e.is_domain]

    def domains(self) -> list[ThesaurusEntry]:
        return [e for e in self.entries if e.is_domain]

    def root_domain(self, concept_id: str) -> str | None:
        current = self.by_id.get(concept_id)
        while current is not None:
            if current.is_domain:
                return current.concept_id
            if current.broader is None:
                return None
            current = self.by_id.get(current.broader)
        return None


def _parse_thesaurus_entry(obj: object, line_no: int) -> ThesaurusEntry:
    def fail(message: str) -> None:
        raise ValueError(f"thesaurus line {line_no}: {message}")

    if not isinstance(obj, dict):
        fail("entry is not an object")
    assert isinstance(obj, dict)
    concept_id = obj.get("concept_id")
    if not isinstance(concept_id, str) or not concept_id:
        fail("missing or empty 'concept_id'")
    preferred = obj.get("preferred_label")
    if not isinstance(preferred, str) or not preferred:
        fail("missing or empty 'preferred_label'")
    alternates = obj.get("alternate_labels", [])
    if not isinstance(alternates, list) or not all(
        isinstance(a, str) for a in alternates
    ):
        fail("'alternate_labels' must be a list of strings")
    broader = obj.get("broader")
    if broader is not None and not isinstance(broader, str):
        fail("'broader' must be a string")
    is_domain = obj.get("is_domain", False)
    if not isinstance(is_domain, bool):
        fail("'is_domain' must be a boolean")
    if is_domain and broader is not None:
        fail("domain entries cannot have a 'broader' parent")
    return ThesaurusEntry(
        concept_id=concept_id,
        preferred_label=preferred,
        alternate_labels=tuple(alternates),
        broader=broader,
        is_domain=is_domain,
    )


def load_thesaurus(path: str | Path) -> Thesaurus:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read thesaurus file {path}: {exc}") from exc
    entries = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise ValueError(f"thesaurus line {line_no}: {exc}") from exc
        entries.append(_parse_thesaurus_entry(obj, line_no))
    return Thesaurus(entries)


def _contains_phrase(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def link_concepts(chunk: Chunk, thesaurus: Thesaurus) -> list[str]:
    """Concept ids mentioned in the chunk, sorted, one entry per concept.

    A mention is a case-insensitive token-boundary phrase match of the
    preferred or any alternate label ("climatology" does not match
    "climate"); occurrence count is irrelevant.
    """
    chunk_tokens = tokenize(chunk.text)
    matched = []
    for entry in thesaurus.concepts():
        labels = (entry.preferred_label, *entry.alternate_labels)
        if any(_contains_phrase(chunk_tokens, tokenize(label)) for label in labels):
            matched.append(entry.concept_id)
    return sorted(matched)


@dataclass
class IngestReport:
    nodes_by_label: dict[str, int] = field(default_factory=dict)
    edges_by_type: dict[str, int] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    chunks: dict[str, Chunk] = field(default_factory=dict)

    @property
    def total_nodes(self) -> int:
        return sum(self.nodes_by_label.values())

    @property
    def total_edges(self) -> int:
        return sum(self.edges_by_type.values())

    def table(self) -> list[tuple[str, int, float]]:
        """(label, count, percentage) rows, count-descending then label."""
        total = self.total_nodes
        rows = sorted(self.nodes_by_label.items(), key=lambda r: (-r[1], r[0]))
        return [
            (label, count, round(100.0 * count / total, 1) if total else 0.0)
            for label, count in rows
        ]


def _slug(prefix: str, value: str) -> str:
    return f"{prefix}:{value.lower()}"


def populate(
    graph: PropertyGraph,
    records: Sequence[PublicationRecord],
    thesaurus: Thesaurus | None = None,
) -> IngestReport:
    """Build the full graph from records plus an optional thesaurus.

    Entities are deduplicated by id with first occurrence winning on props.
    A record whose chunk cannot be built is skipped entirely (no orphan
    Publication without a retrievable chunk) and reported.
    """
    if graph.node_count() > 0:
        raise StoreNotEmptyError("populate requires an empty graph")

    report = IngestReport()
    staged_nodes: dict[str, tuple[str, dict]] = {}  # id -> (label, props)
    staged_edges: set[tuple[str, str, str]] = set()  # (src, etype, dst)

    def stage_node(label: str, node_id: str, props: dict) -> None:
        existing = staged_nodes.get(node_id)
        if existing is None:
            staged_nodes[node_id] = (label, props)
        elif existing[0] != label:
            # First occurrence wins on props, but a cross-label reuse of an
            # id is unrecoverable: edges staged against it would dangle.
            raise DuplicateIdError(
                f"id {node_id!r} used as both {existing[0]} and {label}"
            )

    def stage_edge(src: str, etype: str, dst: str) -> None:
        staged_edges.add((src, etype, dst))

    if thesaurus is not None:
        for entry in thesaurus.domains():
            stage_node("Domain", entry.concept_id, {"label": entry.preferred_label})
        for entry in thesaurus.concepts():
            stage_node(
                "Concept",
                entry.concept_id,
                {
                    "label": entry.preferred_label,
                    "alternate_labels": list(entry.alternate_labels),
                },
            )
            root = thesaurus.root_domain(entry.concept_id)
            if root is not None:
                stage_edge(entry.concept_id, "IN_DOMAIN", root)

    for record in records:
        try:
            chunk = build_chunk(record)
        except EmptyContentError as exc:
            report.errors.append(f"record {record.id!r} skipped: {exc.message}")
            continue
        if record.id in report.chunks:
            report.errors.append(f"record {record.id!r} skipped: duplicate id")
            continue
        report.chunks[record.id] = chunk

        props = {
            "title": record.title,
            "year": record.year,
            "citations_count": record.citations_count,
            "open_access": record.open_access,
        }
        if record.doi is not None:
            props["doi"] = record.doi
        stage_node("Publication", record.id, props)

        for author_id, name in record.authors:
            stage_node("Author", author_id, {"name": name})
            stage_edge(author_id, "AUTHORED", record.id)

        for keyword in record.keywords:
            keyword_id = _slug("kw", keyword)
            stage_node("Keyword", keyword_id, {"label": keyword})
            stage_edge(record.id, "HAS_KEYWORD", keyword_id)

        if record.journal is not None:
            journal_id = _slug("journal", record.journal)
            stage_node("Journal", journal_id, {"name": record.journal})
            stage_edge(record.id, "PUBLISHED_IN", journal_id)

        for project_id in record.projects:
            stage_node("Project", project_id, {})
            stage_edge(record.id, "FUNDED_BY", project_id)

        for software_id in record.software:
            stage_node("Software", software_id, {})
            stage_edge(record.id, "USES_SOFTWARE", software_id)

        for dataset_id in record.datasets:
            stage_node("Dataset", dataset_id, {})
            stage_edge(record.id, "USES_DATASET", dataset_id)

        for unit_id, region in record.research_units:
            stage_node("ResearchUnit", unit_id, {})
            region_id = _slug("region", region)
            stage_node("Region", region_id, {"name": region})
            stage_edge(unit_id, "LOCATED_IN", region_id)
            # Record-level affiliation: every listed author to every listed unit.
            for author_id, _ in record.authors:
                stage_edge(author_id, "AFFILIATED_WITH", unit_id)

        if thesaurus is not None:
            mentioned = link_concepts(chunk, thesaurus)
            for concept_id in mentioned:
                stage_edge(record.id, "MENTIONS_CONCEPT", concept_id)
            # A project describes every concept its funded publications mention.
            for project_id in record.projects:
                for concept_id in mentioned:
                    stage_edge(project_id, "DESCRIBES", concept_id)

    for node_id in sorted(staged_nodes):
        label, props = staged_nodes[node_id]
        graph.add_node(label, node_id, props)
        report.nodes_by_label[label] = report.nodes_by_label.get(label, 0) + 1

    for src, etype, dst in sorted(staged_edges, key=lambda e: (e[0], e[1], e[2])):
        graph.add_edge(src, dst, etype)
        report.edges_by_type[etype] = report.edges_by_type.get(etype, 0) + 1

    return report
