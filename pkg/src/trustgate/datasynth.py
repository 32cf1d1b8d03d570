"""Deterministic generator for attribute records, reports, and misuse sets.

Records are organized around nine medical specialties. Values that carry
clinical meaning (department, speciality, device model/type/location/
manufacturer, data category, storage archive) are drawn from per-specialty
pools, so they co-occur within records and never across specialties; those
attributes are the ones emitted into the co-occurrence corpus. Unique
identifiers (MACs, IPs, staff ids, passwords) stay out of the corpus: they
would bloat the vocabulary without adding any context signal.

Labeled samples pair a record's attribute triple with report history and a
candidate report. Each misuse kind stresses a different scorer part:
wrong-patient and shuffled-report corrupt the report against history,
wrong-device corrupts the attribute bond, and synonym-swap rewords the
report with same-context values so surface n-gram overlap drops while the
attribute semantics stay intact.

Everything is reproducible from a 64-bit seed via the pinned PRNG in
`trustgate.rng`.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .rng import Xoshiro256StarStar
from .scoring import AttributeTriple
from .textnorm import tokenize

CATEGORY_USER = "User"
CATEGORY_DEVICE = "Device"
CATEGORY_DATA = "Data"

LABEL_LEGIT = "legit"
LABEL_MISUSE = "misuse"

MISMATCH_NONE = "none"
MISMATCH_WRONG_PATIENT = "wrong-patient"
MISMATCH_WRONG_DEVICE = "wrong-device"
MISMATCH_SYNONYM_SWAP = "synonym-swap"
MISMATCH_SHUFFLED_REPORT = "shuffled-report"
MISMATCH_KINDS = (
    MISMATCH_WRONG_PATIENT,
    MISMATCH_WRONG_DEVICE,
    MISMATCH_SYNONYM_SWAP,
    MISMATCH_SHUFFLED_REPORT,
)

SPECIALTIES = (
    "radiology",
    "gynecology",
    "oncology",
    "dermatology",
    "cardiology",
    "urology",
    "emergency",
    "dentistry",
    "psychology",
)

# Per-specialty pools. Token overlap across specialties is kept incidental
# ("unit", "report") so co-occurrence statistics, not surface matching,
# carry the signal.
SPECIALTY_POOLS: dict[str, dict] = {
    "radiology": {
        "department": "diagnostic imaging",
        "devices": ("ct scanner", "mri unit", "fluoroscopy imager"),
        "device_type": "imaging",
        "location": "radiology suite",
        "manufacturer": "helix imaging systems",
        "categories": ("radiology report", "contrast scan summary"),
    },
    "gynecology": {
        "department": "womens health",
        "devices": ("fetal doppler", "colposcope probe", "obstetric ultrasound"),
        "device_type": "obstetric",
        "location": "gynecology clinic",
        "manufacturer": "maternal care devices",
        "categories": ("gynecology report", "prenatal screening summary"),
    },
    "oncology": {
        "department": "cancer care",
        "devices": ("linear accelerator", "brachytherapy applicator", "chemo infusion pump"),
        "device_type": "therapeutic",
        "location": "oncology center",
        "manufacturer": "oncora therapeutics",
        "categories": ("oncology report", "tumor staging summary"),
    },
    "dermatology": {
        "department": "skin care",
        "devices": ("digital dermatoscope", "cryotherapy probe", "phototherapy lamp"),
        "device_type": "dermatologic",
        "location": "dermatology clinic",
        "manufacturer": "dermacare instruments",
        "categories": ("dermatology report", "lesion assessment summary"),
    },
    "cardiology": {
        "department": "heart center",
        "devices": ("ecg monitor", "cardiac telemetry unit", "holter recorder"),
        "device_type": "monitoring",
        "location": "cardiology ward",
        "manufacturer": "cardiotech instruments",
        "categories": ("cardiology report", "cardiac rhythm summary"),
    },
    "urology": {
        "department": "renal care",
        "devices": ("flexible cystoscope", "urodynamic analyzer", "lithotripsy unit"),
        "device_type": "endoscopic",
        "location": "urology clinic",
        "manufacturer": "urotech medical",
        "categories": ("urology report", "renal function summary"),
    },
    "emergency": {
        "department": "acute care",
        "devices": ("crash defibrillator", "portable ventilator", "triage vitals monitor"),
        "device_type": "resuscitation",
        "location": "emergency bay",
        "manufacturer": "rapidresponse medical",
        "categories": ("emergency report", "trauma assessment summary"),
    },
    "dentistry": {
        "department": "oral health",
        "devices": ("panoramic dental imager", "intraoral camera", "dental drill console"),
        "device_type": "dental",
        "location": "dentistry clinic",
        "manufacturer": "orthodent equipment",
        "categories": ("dentistry report", "dental radiograph summary"),
    },
    "psychology": {
        "department": "behavioral health",
        "devices": ("biofeedback console", "eeg headset", "cognitive assessment tablet"),
        "device_type": "behavioral",
        "location": "psychology office",
        "manufacturer": "mindmetric labs",
        "categories": ("psychology report", "behavioral evaluation summary"),
    },
}

POSITIONS = ("attending physician", "resident physician", "nurse practitioner", "clinical technician")
ACCESS_LEVELS = ("L0", "L1", "L2", "L3", "L4")
ENCRYPTIONS = ("aes256", "rsa2048", "chacha20")
STORAGE_TYPES = ("container", "ssd", "vm", "object store")
SENSITIVITIES = ("low", "moderate", "high", "restricted")
COMPLIANCE_REGIMES = ("hipaa", "gdpr", "pipeda")

FIRST_NAMES = (
    "maria", "omar", "ines", "viktor", "amara", "jonas", "leila", "tomas",
    "priya", "hassan", "greta", "nikolai", "sofia", "mateo", "yuki", "dara",
)
LAST_NAMES = (
    "santos", "keller", "novak", "okafor", "lindqvist", "marino", "haddad",
    "petrova", "nakamura", "silva", "brandt", "moreau", "kovacs", "duarte",
)

# Attributes whose values belong in the co-occurrence corpus (and hence in
# the embedding vocabulary).
EMBEDDABLE_ATTRIBUTES = frozenset(
    {
        "Department",
        "Speciality",
        "Device model",
        "Device type",
        "Device location",
        "Device manufacture",
        "Data category",
        "Data storage location",
    }
)

USER_ATTRIBUTE_NAMES = (
    "Position", "Department", "Speciality", "ID", "Insurance number",
    "User access level", "User consent", "Password", "Manager ID",
)
DEVICE_ATTRIBUTE_NAMES = (
    "MAC address", "IP address", "Device model", "Device type",
    "Device location", "Device manufacture",
)
DATA_ATTRIBUTE_NAMES = (
    "Data category", "Data encryption", "Data storage location",
    "Storage type", "Data sensitivity level", "Data compliance",
)
CATEGORY_NAMES = {
    CATEGORY_USER: USER_ATTRIBUTE_NAMES,
    CATEGORY_DEVICE: DEVICE_ATTRIBUTE_NAMES,
    CATEGORY_DATA: DATA_ATTRIBUTE_NAMES,
}

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class PatientRecord:
    """One internally consistent record: the substitution values for report
    templates plus the derived attribute triple."""

    specialty: str
    values: dict[str, str]

    def triple(self) -> AttributeTriple:
        v = self.values
        user = (
            ("Position", v["position"]),
            ("Department", v["department"]),
            ("Speciality", v["speciality"]),
            ("ID", v["user_id"]),
            ("Insurance number", v["insurance_number"]),
            ("User access level", v["access_level"]),
            ("User consent", v["consent"]),
            ("Password", v["password"]),
            ("Manager ID", v["manager_id"]),
        )
        device = (
            ("MAC address", v["mac_address"]),
            ("IP address", v["ip_address"]),
            ("Device model", v["device_model"]),
            ("Device type", v["device_type"]),
            ("Device location", v["device_location"]),
            ("Device manufacture", v["device_manufacture"]),
        )
        data = (
            ("Data category", v["data_category"]),
            ("Data encryption", v["data_encryption"]),
            ("Data storage location", v["data_storage_location"]),
            ("Storage type", v["storage_type"]),
            ("Data sensitivity level", v["data_sensitivity"]),
            ("Data compliance", v["data_compliance"]),
        )
        return AttributeTriple(user=user, device=device, output=data)


@dataclass(frozen=True)
class LabeledSample:
    triple: AttributeTriple
    history: tuple[str, ...]
    candidate_report: str
    label: str
    mismatch_kind: str
    specialty: str

    def to_json_dict(self) -> dict:
        return {
            "user": [list(a) for a in self.triple.user],
            "device": [list(a) for a in self.triple.device],
            "output": [list(a) for a in self.triple.output],
            "history": list(self.history),
            "candidate_report": self.candidate_report,
            "label": self.label,
            "mismatch_kind": self.mismatch_kind,
            "specialty": self.specialty,
        }

    @classmethod
    def from_json_dict(cls, row: dict) -> "LabeledSample":
        return cls(
            triple=AttributeTriple.from_lists(row["user"], row["device"], row["output"]),
            history=tuple(row["history"]),
            candidate_report=row["candidate_report"],
            label=row["label"],
            mismatch_kind=row["mismatch_kind"],
            specialty=row["specialty"],
        )


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledSample, ...]
    corpus: tuple[str, ...]  # one context document per underlying record


def load_templates(path: str | Path | None = None) -> list[str]:
    """Report templates, one per line, {placeholder} syntax; the bundled
    file by default."""
    if path is None:
        text = resources.files("trustgate.data").joinpath("templates/reports.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    templates = [line.strip() for line in text.splitlines() if line.strip()]
    if not templates:
        raise GenerationError("no report templates found")
    return templates


def get_template(template_id: int, path: str | Path | None = None) -> str:
    templates = load_templates(path)
    if not 0 <= template_id < len(templates):
        raise GenerationError(
            f"template {template_id} does not exist (have {len(templates)})"
        )
    return templates[template_id]


def generate_report(template: str, record: dict[str, str]) -> str:
    """Substitute {placeholder} slots; missing values are an error."""

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in record:
            raise GenerationError(f"record missing placeholder {key!r}")
        return record[key]

    return _PLACEHOLDER_RE.sub(substitute, template)


def generate_report_by_id(
    template_id: int, record: dict[str, str], path: str | Path | None = None
) -> str:
    return generate_report(get_template(template_id, path), record)


def _hex_string(rng: Xoshiro256StarStar, digits: int) -> str:
    return "".join("0123456789abcdef"[rng.randbelow(16)] for _ in range(digits))


def _value_for(rng: Xoshiro256StarStar, name: str, specialty: str) -> str:
    pool = SPECIALTY_POOLS[specialty]
    if name == "Position":
        return rng.choice(POSITIONS)
    if name == "Department":
        return pool["department"]
    if name == "Speciality":
        return specialty
    if name == "ID" or name == "Manager ID":
        return f"U-{rng.randbelow(1_000_000):06d}"
    if name == "Insurance number":
        return f"HP-{rng.randbelow(10_000_000):07d}"
    if name == "User access level":
        return rng.choice(ACCESS_LEVELS)
    if name == "User consent":
        return "granted"
    if name == "Password":
        return f"pw-{_hex_string(rng, 8)}"
    if name == "MAC address":
        return ":".join(_hex_string(rng, 2).upper() for _ in range(6))
    if name == "IP address":
        return f"10.{rng.randbelow(256)}.{rng.randbelow(256)}.{rng.randbelow(254) + 1}"
    if name == "Device model":
        return rng.choice(pool["devices"])
    if name == "Device type":
        return pool["device_type"]
    if name == "Device location":
        return pool["location"]
    if name == "Device manufacture":
        return pool["manufacturer"]
    if name == "Data category":
        return rng.choice(pool["categories"])
    if name == "Data encryption":
        return rng.choice(ENCRYPTIONS)
    if name == "Data storage location":
        return f"{specialty} archive"
    if name == "Storage type":
        return rng.choice(STORAGE_TYPES)
    if name == "Data sensitivity level":
        return rng.choice(SENSITIVITIES)
    if name == "Data compliance":
        return rng.choice(COMPLIANCE_REGIMES)
    raise GenerationError(f"no value domain for attribute {name!r}")


def generate_record(rng: Xoshiro256StarStar, specialty: str | None = None) -> PatientRecord:
    specialty = specialty or rng.choice(SPECIALTIES)
    patient = f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}"
    values = {
        "patient": patient,
        "position": _value_for(rng, "Position", specialty),
        "department": _value_for(rng, "Department", specialty),
        "speciality": specialty,
        "user_id": _value_for(rng, "ID", specialty),
        "insurance_number": _value_for(rng, "Insurance number", specialty),
        "access_level": _value_for(rng, "User access level", specialty),
        "consent": "granted",
        "password": _value_for(rng, "Password", specialty),
        "manager_id": _value_for(rng, "Manager ID", specialty),
        "mac_address": _value_for(rng, "MAC address", specialty),
        "ip_address": _value_for(rng, "IP address", specialty),
        "device_model": _value_for(rng, "Device model", specialty),
        "device_type": _value_for(rng, "Device type", specialty),
        "device_location": _value_for(rng, "Device location", specialty),
        "device_manufacture": _value_for(rng, "Device manufacture", specialty),
        "data_category": _value_for(rng, "Data category", specialty),
        "data_encryption": _value_for(rng, "Data encryption", specialty),
        "data_storage_location": _value_for(rng, "Data storage location", specialty),
        "storage_type": _value_for(rng, "Storage type", specialty),
        "data_sensitivity": _value_for(rng, "Data sensitivity level", specialty),
        "data_compliance": _value_for(rng, "Data compliance", specialty),
    }
    return PatientRecord(specialty=specialty, values=values)


def context_document(triple: AttributeTriple) -> str:
    """The corpus line for a record: its embeddable attribute values."""
    parts = []
    for attrs in (triple.user, triple.device, triple.output):
        for name, value in attrs:
            if name in EMBEDDABLE_ATTRIBUTES:
                parts.append(value)
    return " ".join(parts)


def corpus_to_sequences(corpus: Iterable[str]) -> list[list[str]]:
    return [tokenize(line) for line in corpus]


def generate_attributes(seed: int, count_per_category: int) -> list[tuple[str, str, str]]:
    """Flat (category, name, value) rows, `count_per_category` per category."""
    rng = Xoshiro256StarStar(seed)
    rows = []
    for category in (CATEGORY_USER, CATEGORY_DEVICE, CATEGORY_DATA):
        names = CATEGORY_NAMES[category]
        for _ in range(count_per_category):
            specialty = rng.choice(SPECIALTIES)
            name = rng.choice(names)
            rows.append((category, name, _value_for(rng, name, specialty)))
    return rows


def write_attributes_csv(rows: list[tuple[str, str, str]], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["category", "name", "value"])
        writer.writerows(rows)


def _swap_device(rng: Xoshiro256StarStar, sample_specialty: str) -> PatientRecord:
    others = [s for s in SPECIALTIES if s != sample_specialty]
    return generate_record(rng, rng.choice(others))


def _synonym_record(rng: Xoshiro256StarStar, record: PatientRecord) -> dict[str, str]:
    """Same record, reworded: sibling values from the same specialty pools."""
    pool = SPECIALTY_POOLS[record.specialty]
    values = dict(record.values)

    def other(options, current):
        remaining = [o for o in options if o != current]
        return rng.choice(remaining) if remaining else current

    values["device_model"] = other(pool["devices"], values["device_model"])
    values["data_category"] = other(pool["categories"], values["data_category"])
    values["position"] = other(POSITIONS, values["position"])
    return values


def _shuffle_report(rng: Xoshiro256StarStar, report: str) -> str:
    tokens = tokenize(report)
    rng.shuffle(tokens)
    return " ".join(tokens)


def generate_labeled_dataset(seed: int, n: int, mismatch_rate: float) -> Dataset:
    """n samples, ceil(n * mismatch_rate) of them misuse with a uniformly
    drawn mismatch kind, in a deterministically shuffled order."""
    if not 0.0 <= mismatch_rate <= 1.0:
        raise GenerationError(f"mismatch_rate must be in [0, 1], got {mismatch_rate}")
    if n < 0:
        raise GenerationError(f"n must be >= 0, got {n}")
    rng = Xoshiro256StarStar(seed)
    templates = load_templates()
    if len(templates) < 3:
        raise GenerationError("misuse synthesis needs at least 3 templates")

    misuse_count = math.ceil(n * mismatch_rate)
    flags = [True] * misuse_count + [False] * (n - misuse_count)
    rng.shuffle(flags)

    records = [generate_record(rng) for _ in range(n)]
    corpus = tuple(context_document(r.triple()) for r in records)

    samples: list[LabeledSample] = []
    for i, record in enumerate(records):
        history = (
            generate_report(templates[0], record.values),
            generate_report(templates[1], record.values),
        )
        triple = record.triple()
        if not flags[i]:
            samples.append(
                LabeledSample(
                    triple=triple,
                    history=history,
                    candidate_report=generate_report(templates[0], record.values),
                    label=LABEL_LEGIT,
                    mismatch_kind=MISMATCH_NONE,
                    specialty=record.specialty,
                )
            )
            continue

        kind = rng.choice(MISMATCH_KINDS)
        candidate = generate_report(templates[0], record.values)
        if kind == MISMATCH_WRONG_PATIENT:
            if n > 1:
                j = rng.randbelow(n - 1)
                donor = records[j if j < i else j + 1]
            else:
                donor = generate_record(rng)
            candidate = generate_report(templates[0], donor.values)
        elif kind == MISMATCH_WRONG_DEVICE:
            foreign = _swap_device(rng, record.specialty)
            triple = AttributeTriple(
                user=triple.user, device=foreign.triple().device, output=triple.output
            )
        elif kind == MISMATCH_SYNONYM_SWAP:
            candidate = generate_report(templates[2], _synonym_record(rng, record))
        elif kind == MISMATCH_SHUFFLED_REPORT:
            candidate = _shuffle_report(rng, candidate)
        samples.append(
            LabeledSample(
                triple=triple,
                history=history,
                candidate_report=candidate,
                label=LABEL_MISUSE,
                mismatch_kind=kind,
                specialty=record.specialty,
            )
        )
    return Dataset(samples=tuple(samples), corpus=corpus)


def write_samples_jsonl(samples: Iterable[LabeledSample], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps(sample.to_json_dict(), sort_keys=True) + "\n")


def read_samples_jsonl(path: Path) -> list[LabeledSample]:
    samples = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                samples.append(LabeledSample.from_json_dict(json.loads(line)))
    return samples


def write_corpus(corpus: Iterable[str], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in corpus:
            handle.write(line + "\n")


def read_corpus(path: Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def golden_request_dict(seed: int) -> dict:
    """A fully consistent decide-request body: consented record, history-
    derived report, all microservice checks green. Deterministic per seed."""
    rng = Xoshiro256StarStar(seed)
    templates = load_templates()
    record = generate_record(rng)
    triple = record.triple()
    return {
        "user": [list(a) for a in triple.user],
        "device": [list(a) for a in triple.device],
        "output": [list(a) for a in triple.output],
        "operations": ["Read", "Update"],
        "candidate_report": generate_report(templates[0], record.values),
        "patient_history": [
            generate_report(templates[0], record.values),
            generate_report(templates[1], record.values),
        ],
        "checks": {
            "authentication": True,
            "authorization": True,
            "encryption": True,
            "logging": True,
        },
        "group_ids": {"user": 1, "device": 2, "output": 3},
        "requested_level": 2,
    }


# --- compliance-fixture support -------------------------------------------

def planted_identifier_fixture(seed: int) -> list[tuple[str, str, str]]:
    """(expected class, attribute name, value) with exactly one attribute
    per protected-identifier class, in the generator's native formats."""
    rng = Xoshiro256StarStar(seed)
    patient = f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}"
    phone = f"250-555-{rng.randbelow(10_000):04d}"
    fax = f"250-556-{rng.randbelow(10_000):04d}"
    return [
        ("Name", "patient name", patient),
        ("SSN", "ssn", f"{rng.randbelow(900) + 100}-{rng.randbelow(90) + 10}-{rng.randbelow(9000) + 1000}"),
        ("SubStateGeography", "home address", f"{rng.randbelow(9000) + 100} maple street victoria"),
        ("Phone", "phone number", phone),
        ("Fax", "fax number", fax),
        ("DeviceId", "device serial number", f"SN-{rng.randbelow(1_000_000):06d}"),
        ("Email", "email", f"{patient.replace(' ', '.')}@clinic.example"),
        ("WebUrl", "portal url", f"https://portal.example/chart/{rng.randbelow(100_000)}"),
        ("VehicleId", "license plate", f"{_hex_string(rng, 3).upper()} {rng.randbelow(1000):03d}"),
        ("IpAddress", "ip address", _value_for(rng, "IP address", "cardiology")),
        ("MedicalRecordNumber", "medical record number", f"MRN-{rng.randbelow(10_000_000):07d}"),
        ("Biometric", "fingerprint", f"template-{_hex_string(rng, 8)}"),
        ("HealthPlanNumber", "insurance number", _value_for(rng, "Insurance number", "cardiology")),
        ("FacePhoto", "face photo", f"face_{rng.randbelow(100_000)}.png"),
        ("AccountNumber", "account number", f"ACCT-{rng.randbelow(1_000_000):06d}"),
        ("OtherUniqueId", "patient id", f"PID-{rng.randbelow(1_000_000):06d}"),
        ("CertificateLicense", "license number", f"LIC-{rng.randbelow(100_000):05d}"),
        ("DateElement", "date of birth", f"19{rng.randbelow(80) + 10}-{rng.randbelow(12) + 1:02d}-{rng.randbelow(28) + 1:02d}"),
    ]
