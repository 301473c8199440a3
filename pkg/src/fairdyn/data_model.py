"""Persistent schemas: participants, communication events, opinion
records, minority membership, and dataset load/save with validation."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

QUESTIONS = (
    "euthanasia",
    "fssocsec",
    "fswelfare",
    "jobguar",
    "marijuana",
    "toomucheqrights",
)

# Fixed topic typology used when grouping audit results.
QUESTION_TYPOLOGY = {
    "euthanasia": "Consensus",
    "jobguar": "Consensus",
    "marijuana": "Polarized",
    "fssocsec": "Apathetic",
    "fswelfare": "Apathetic",
    "toomucheqrights": "Apathetic",
}

WAVES = (1, 2, 3, 4, 5, 6)
STANCES = ("A", "B", "AB", "Missing")
CHANNELS = ("call", "text")

MINORITY_NAMES = (
    "Gender",
    "Ethnicity",
    "FBPrivacy",
    "EnglishNative",
    "ParentsIncome",
    "ParentsEducation",
    "ParentsReligion",
)

# 14 ordered yearly income brackets plus an explicit no-answer sentinel.
INCOME_BRACKETS = (
    "<10k",
    "10-20k",
    "20-30k",
    "30-40k",
    "40-50k",
    "50-60k",
    "60-75k",
    "75-100k",
    "100-125k",
    "125-150k",
    "150-175k",
    "175-200k",
    "200-250k",
    ">250k",
)
INCOME_UNSURE = "unsure/no answer"
HIGH_INCOME_BRACKETS = frozenset({"200-250k", ">250k"})

DEFAULT_FB_PRIVACY = "All my friends can see my posts"
WHITE_ETHNICITY_VALUES = frozenset({"white/caucasian", "white", "caucasian"})
COLLEGE_GRAD_VALUES = frozenset(
    {"college graduate", "graduate degree", "bachelor", "master", "doctorate"}
)
ROMAN_CATHOLIC_VALUES = frozenset({"roman catholic", "catholic"})
NATIVE_ENGLISH_VALUES = frozenset({"yes", "true", "1", "native"})


class DatasetError(ValueError):
    """Malformed file, referential violation, or duplicate record."""


@dataclass
class Participant:
    id: str
    # wave -> {attribute name -> value}; absent key means missing answer.
    survey_attributes: dict = field(default_factory=dict)
    active_waves: set = field(default_factory=set)

    def attribute(self, name: str, wave: int):
        return self.survey_attributes.get(wave, {}).get(name)

    def earliest_answer(self, name: str):
        """Value from the earliest wave with a non-missing answer, or None."""
        for wave in sorted(self.survey_attributes):
            value = self.survey_attributes[wave].get(name)
            if value is not None:
                return value
        return None


@dataclass(frozen=True)
class CommEvent:
    source: str
    target: str
    timestamp: float
    channel: str = "call"

    def __post_init__(self):
        if self.source == self.target:
            raise DatasetError(f"self-loop event on participant {self.source!r}")
        if self.timestamp < 0:
            raise DatasetError(f"negative timestamp {self.timestamp}")
        if self.channel not in CHANNELS:
            raise DatasetError(f"unknown channel {self.channel!r}")

    def sort_key(self):
        return (self.timestamp, self.source, self.target, self.channel)


@dataclass(frozen=True)
class OpinionRecord:
    participant_id: str
    question: str
    wave: int
    stance: str

    def __post_init__(self):
        if self.question not in QUESTIONS:
            raise DatasetError(f"unknown question {self.question!r}")
        if self.wave not in WAVES:
            raise DatasetError(f"wave must be 1..6, got {self.wave}")
        if self.stance not in STANCES:
            raise DatasetError(f"unknown stance {self.stance!r}")


@dataclass
class MinorityMembership:
    participant_id: str
    flags: dict
    undetermined: set = field(default_factory=set)

    @property
    def intersection_count(self) -> int:
        return sum(1 for v in self.flags.values() if v)


@dataclass
class Dataset:
    participants: dict  # id -> Participant
    events: list  # sorted CommEvents
    opinions: list
    provenance: dict = field(default_factory=lambda: {"kind": "real"})

    def __post_init__(self):
        self.validate()

    def validate(self):
        ids = set(self.participants)
        for ev in self.events:
            for pid in (ev.source, ev.target):
                if pid not in ids:
                    raise DatasetError(f"event references unknown participant {pid!r}")
        seen = set()
        for op in self.opinions:
            if op.participant_id not in ids:
                raise DatasetError(
                    f"opinion references unknown participant {op.participant_id!r}"
                )
            key = (op.participant_id, op.question, op.wave)
            if key in seen:
                raise DatasetError(f"duplicate opinion record for {key}")
            seen.add(key)
        self.events = sorted(self.events, key=CommEvent.sort_key)
        self._opinion_index = {
            (op.participant_id, op.question, op.wave): op for op in self.opinions
        }

    def opinion(self, participant_id: str, question: str, wave: int):
        """The recorded stance, or 'Missing' when no record exists."""
        rec = self._opinion_index.get((participant_id, question, wave))
        return rec.stance if rec is not None else "Missing"

    def counts(self):
        return {
            "participants": len(self.participants),
            "events": len(self.events),
            "opinions": len(self.opinions),
        }


def _parse_value(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_codebook(path) -> dict:
    """Per-question mapping of raw answer strings to A/B/AB."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"codebook file not found: {path}")
    with open(path) as fh:
        book = json.load(fh)
    for question, mapping in book.items():
        if question not in QUESTIONS:
            raise DatasetError(f"codebook covers unknown question {question!r}")
        for raw, stance in mapping.items():
            if stance not in ("A", "B", "AB"):
                raise DatasetError(
                    f"codebook maps {raw!r} to invalid stance {stance!r}"
                )
    return book


def _coerce_stance(raw: str, question: str, codebook, where: str) -> str:
    if raw in STANCES:
        return raw
    if codebook is None:
        raise DatasetError(
            f"{where}: stance {raw!r} is not one of {STANCES} and no codebook was given"
        )
    mapping = codebook.get(question, {})
    if raw not in mapping:
        raise DatasetError(f"{where}: answer {raw!r} not in codebook for {question}")
    return mapping[raw]


def _resolve_paths(paths, fmt):
    ext = "csv" if fmt == "csv" else "json"
    if isinstance(paths, (str, Path)) and Path(paths).is_dir():
        base = Path(paths)
        return {k: base / f"{k}.{ext}" for k in ("participants", "events", "opinions")}
    return {k: Path(v) for k, v in dict(paths).items()}


def load_dataset(paths, format: str = "csv", codebook=None) -> Dataset:
    """Load and validate a dataset from participants/events/opinions files.

    ``paths`` is either a directory containing participants.csv,
    events.csv and opinions.csv (or .json) or a mapping with those keys.
    """
    if format not in ("csv", "json"):
        raise DatasetError(f"unsupported format {format!r}")
    files = _resolve_paths(paths, format)
    for key, p in files.items():
        if not p.exists():
            raise DatasetError(f"{key} file not found: {p}")
    if format == "csv":
        participants = _load_participants_csv(files["participants"])
        events = _load_events_csv(files["events"])
        opinions = _load_opinions_csv(files["opinions"], codebook)
    else:
        participants = _load_participants_json(files["participants"])
        events = _load_events_json(files["events"])
        opinions = _load_opinions_json(files["opinions"], codebook)
    return Dataset(participants=participants, events=events, opinions=opinions)


def _load_participants_csv(path) -> dict:
    participants = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise DatasetError(f"{path}: missing header with an 'id' column")
        for lineno, row in enumerate(reader, start=2):
            pid = row["id"]
            if pid in participants:
                raise DatasetError(f"{path}:{lineno}: duplicate participant {pid!r}")
            attrs = {}
            for col, raw in row.items():
                if col == "id" or raw is None:
                    continue
                if "@w" not in col:
                    raise DatasetError(
                        f"{path}:{lineno}: column {col!r} is not of the form attr@w<k>"
                    )
                name, _, wave_s = col.rpartition("@w")
                try:
                    wave = int(wave_s)
                except ValueError:
                    raise DatasetError(f"{path}:{lineno}: bad wave in column {col!r}")
                value = _parse_value(raw)
                if value is not None:
                    attrs.setdefault(wave, {})[name] = value
            participants[pid] = Participant(
                id=pid, survey_attributes=attrs, active_waves=set(attrs)
            )
    return participants


def _load_events_csv(path) -> list:
    events = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"source", "target", "timestamp", "channel"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DatasetError(f"{path}: header must contain {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                events.append(
                    CommEvent(
                        source=row["source"],
                        target=row["target"],
                        timestamp=float(row["timestamp"]),
                        channel=row["channel"],
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
    return events


def _load_opinions_csv(path, codebook) -> list:
    opinions = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"participant_id", "question", "wave", "stance"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DatasetError(f"{path}: header must contain {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            try:
                wave = int(row["wave"])
            except ValueError as exc:
                raise DatasetError(f"{where}: bad wave {row['wave']!r}") from exc
            stance = _coerce_stance(row["stance"], row["question"], codebook, where)
            try:
                opinions.append(
                    OpinionRecord(
                        participant_id=row["participant_id"],
                        question=row["question"],
                        wave=wave,
                        stance=stance,
                    )
                )
            except DatasetError as exc:
                raise DatasetError(f"{where}: {exc}") from exc
    return opinions


def _load_participants_json(path) -> dict:
    with open(path) as fh:
        rows = json.load(fh)
    participants = {}
    for row in rows:
        pid = row["id"]
        if pid in participants:
            raise DatasetError(f"{path}: duplicate participant {pid!r}")
        attrs = {
            int(wave): dict(vals) for wave, vals in row.get("survey_attributes", {}).items()
        }
        participants[pid] = Participant(
            id=pid, survey_attributes=attrs, active_waves=set(attrs)
        )
    return participants


def _load_events_json(path) -> list:
    with open(path) as fh:
        rows = json.load(fh)
    return [
        CommEvent(
            source=r["source"],
            target=r["target"],
            timestamp=float(r["timestamp"]),
            channel=r["channel"],
        )
        for r in rows
    ]


def _load_opinions_json(path, codebook) -> list:
    with open(path) as fh:
        rows = json.load(fh)
    out = []
    for r in rows:
        stance = _coerce_stance(str(r["stance"]), r["question"], codebook, str(path))
        out.append(
            OpinionRecord(
                participant_id=r["participant_id"],
                question=r["question"],
                wave=int(r["wave"]),
                stance=stance,
            )
        )
    return out


def save_dataset(dataset: Dataset, out_dir, format: str = "csv") -> dict:
    """Write participants/events/opinions files; returns the paths."""
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if format == "csv" else "json"
    paths = {k: out_dir / f"{k}.{ext}" for k in ("participants", "events", "opinions")}
    if format == "csv":
        _save_participants_csv(dataset, paths["participants"])
        _save_events_csv(dataset, paths["events"])
        _save_opinions_csv(dataset, paths["opinions"])
    elif format == "json":
        _save_json(dataset, paths)
    else:
        raise DatasetError(f"unsupported format {format!r}")
    return paths


def _format_value(value) -> str:
    if value is None:
        return ""
    return str(value)


def _save_participants_csv(dataset, path):
    attr_cols = sorted(
        {
            f"{name}@w{wave}"
            for p in dataset.participants.values()
            for wave, vals in p.survey_attributes.items()
            for name in vals
        }
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + attr_cols)
        for pid in sorted(dataset.participants):
            p = dataset.participants[pid]
            row = [pid]
            for col in attr_cols:
                name, _, wave_s = col.rpartition("@w")
                row.append(_format_value(p.attribute(name, int(wave_s))))
            writer.writerow(row)


def _save_events_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "timestamp", "channel"])
        for ev in dataset.events:
            writer.writerow([ev.source, ev.target, repr(ev.timestamp), ev.channel])


def _save_opinions_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant_id", "question", "wave", "stance"])
        for op in sorted(
            dataset.opinions, key=lambda o: (o.participant_id, o.question, o.wave)
        ):
            writer.writerow([op.participant_id, op.question, op.wave, op.stance])


def _save_json(dataset, paths):
    participants = [
        {
            "id": pid,
            "survey_attributes": {
                str(w): vals
                for w, vals in sorted(dataset.participants[pid].survey_attributes.items())
            },
        }
        for pid in sorted(dataset.participants)
    ]
    events = [
        {
            "source": ev.source,
            "target": ev.target,
            "timestamp": ev.timestamp,
            "channel": ev.channel,
        }
        for ev in dataset.events
    ]
    opinions = [
        {
            "participant_id": op.participant_id,
            "question": op.question,
            "wave": op.wave,
            "stance": op.stance,
        }
        for op in sorted(
            dataset.opinions, key=lambda o: (o.participant_id, o.question, o.wave)
        )
    ]
    for key, rows in (
        ("participants", participants),
        ("events", events),
        ("opinions", opinions),
    ):
        with open(paths[key], "w") as fh:
            json.dump(rows, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _norm(value) -> str:
    return str(value).strip().lower()


def derive_minorities(dataset: Dataset) -> list:
    """Compute the seven minority flags for every participant.

    Each flag uses the earliest wave with a non-missing answer; missing
    underlying data yields flag=False plus an 'undetermined' annotation,
    except Facebook privacy where a missing answer itself flags the
    participant.
    """
    out = []
    for pid in sorted(dataset.participants):
        p = dataset.participants[pid]
        flags = {}
        undetermined = set()

        gender = p.earliest_answer("gender")
        if gender is None:
            flags["Gender"] = False
            undetermined.add("Gender")
        else:
            flags["Gender"] = _norm(gender) == "female"

        ethnicity = p.earliest_answer("ethnicity")
        if ethnicity is None:
            flags["Ethnicity"] = False
            undetermined.add("Ethnicity")
        else:
            flags["Ethnicity"] = _norm(ethnicity) not in WHITE_ETHNICITY_VALUES

        fb = p.earliest_answer("fbprivacy")
        # edited-the-default and no-answer both count as the minority
        flags["FBPrivacy"] = fb is None or _norm(fb) != _norm(DEFAULT_FB_PRIVACY)

        native = p.earliest_answer("english_native")
        if native is None:
            flags["EnglishNative"] = False
            undetermined.add("EnglishNative")
        else:
            flags["EnglishNative"] = _norm(native) not in NATIVE_ENGLISH_VALUES

        income = p.earliest_answer("parents_income_bracket")
        if income is None or _norm(income) == _norm(INCOME_UNSURE):
            flags["ParentsIncome"] = False
            undetermined.add("ParentsIncome")
        else:
            flags["ParentsIncome"] = str(income) in HIGH_INCOME_BRACKETS

        mother_ed = p.earliest_answer("mother_education")
        father_ed = p.earliest_answer("father_education")
        grads = [
            _norm(v) in COLLEGE_GRAD_VALUES
            for v in (mother_ed, father_ed)
            if v is not None
        ]
        if any(grads):
            flags["ParentsEducation"] = False
        elif mother_ed is not None and father_ed is not None:
            flags["ParentsEducation"] = True
        else:
            flags["ParentsEducation"] = False
            undetermined.add("ParentsEducation")

        mother_rel = p.earliest_answer("mother_religion")
        father_rel = p.earliest_answer("father_religion")
        non_catholic = [
            _norm(v) not in ROMAN_CATHOLIC_VALUES
            for v in (mother_rel, father_rel)
            if v is not None
        ]
        if any(non_catholic):
            flags["ParentsReligion"] = True
        elif mother_rel is not None and father_rel is not None:
            flags["ParentsReligion"] = False
        else:
            flags["ParentsReligion"] = False
            undetermined.add("ParentsReligion")

        out.append(
            MinorityMembership(participant_id=pid, flags=flags, undetermined=undetermined)
        )
    return out
