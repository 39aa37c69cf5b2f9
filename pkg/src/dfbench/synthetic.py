"""Deterministic synthetic mini-corpora in the ingestion manifest layout.

NIST data is not redistributed. :func:`build_corpus` writes small stand-ins
for all five suites, laid out exactly like a user-supplied corpus::

    <root>/string_search/manifest.toml        + fss.csv
    <root>/deleted_file_recovery/manifest.toml + dfr.csv
    <root>/file_carving/manifest.toml          + carving.csv, images/
    <root>/windows_registry/manifest.toml      + registry.csv, dumps/
    <root>/sqlite/manifest.toml                + sqlite.csv, db/
"""

from __future__ import annotations

import csv
import io
import sqlite3
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .metrics import Suite

SEED = 20251016

FSS_CASES = [f"FT-SS-{i:02d}" for i in range(1, 11)]
DFR_BLOCK_CASES = ["DFR-01", "DFR-02", "DFR-03", "DFR-04", "DFR-05", "DFR-11", "DFR-12", "DFR-14"]
DFR_SUB_CASES = ["DFR-01-MAC", "DFR-01-RECYCLE", "DFR-01-SIZE", "DFR-04-CHAR", "DFR-07-SIZE",
                 "DFR-11-NTFS", "DFR-11-SIZE"]
DFR_UNSCOREABLE = ["DFR-06", "DFR-07", "DFR-08", "DFR-09", "DFR-10", "DFR-13"]
CARVE_TYPES = ["conti", "non", "frag"]
CARVE_FORMATS = ["bmp", "gif", "png", "tiff", "heic"]
CARVING_CASES = [f"carve-{t}-{f}" for t in CARVE_TYPES for f in CARVE_FORMATS]
REGISTRY_CASES = (
    ["CR-02", "CR-03", "CR-04"] + [f"MR-{i:02d}" for i in range(1, 16)] + [f"NR-{i:02d}" for i in range(1, 8)]
)
# extraction failed for these in the reference runs; no ground truth is shipped
REGISTRY_MISSING = ["CR-01", "CR-05", "NR-08"]
SQLITE_CASES = ["SFT-01", "SFT-02", "SFT-03", "SFT-04"]

SUPPORTED_CASES = {
    Suite.STRING_SEARCH: FSS_CASES,
    Suite.DELETED_FILE_RECOVERY: DFR_BLOCK_CASES + DFR_SUB_CASES,
    Suite.FILE_CARVING: CARVING_CASES,
    Suite.WINDOWS_REGISTRY: REGISTRY_CASES,
    Suite.SQLITE: SQLITE_CASES,
}

FSS_KEYWORD = "DireWolf"

PARTITION_START = 2048


@dataclass
class Corpus:
    root: Path

    def manifest(self, suite: "Suite | str") -> Path:
        return self.root / Suite.parse(suite).value / "manifest.toml"

    def manifests(self) -> dict:
        return {s: self.manifest(s) for s in Suite}


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_manifest(path: Path, suite: Suite, sources, extra: str = "") -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = f'suite = "{suite.value}"\nsources = [{", ".join(repr(s).replace(chr(39), chr(34)) for s in sources)}]\n'
    path.write_text(body + extra, encoding="utf-8")


# string search

def _fss(root: Path, rng: np.random.Generator) -> None:
    words = ["alpha", "ledger", "harbour", "quartz", "meadow", "signal", "copper", "lantern"]
    rows = []
    ident = 896
    for n, case in enumerate(FSS_CASES):
        os_name = "windows" if n % 2 == 0 else "linux"
        count = 3 if n == 0 else int(rng.integers(2, 6))
        for k in range(count):
            status = ["active", "deleted", "unallocated"][k % 3]
            filler = " ".join(rng.choice(words, size=4))
            rows.append([case, f"{ident:04d}", f"{filler} {FSS_KEYWORD} {status} line", os_name, status])
            ident += 2
    _write_csv(root / "fss.csv", ["test_case", "identifier", "line_text", "os", "file_status"], rows)
    _write_manifest(root / "manifest.toml", Suite.STRING_SEARCH, ["fss.csv"])


# deleted file recovery

_NON_LATIN = ["файл_отчёт.txt", "文件记录.doc", "αρχείο.pdf", "ファイル.png", "Ünïcödé_naïve.txt"]


def _ts(rng) -> str:
    base = 1_262_304_000 + int(rng.integers(0, 300_000_000))
    return np.datetime_as_string(np.datetime64(base, "s"), unit="s") + "Z"


def _dfr(root: Path, rng: np.random.Generator) -> None:
    header = ["test_case", "file_name", "size", "type", "os", "access_time_stamp", "modify_time_stamp",
              "change_time_stamp", "deleted_time_stamp", "start_sector", "fragments", "dfr_blocks",
              "partition_start_sector", "sector_size", "sectors_per_block"]
    rows = []
    cursor = [PARTITION_START + 64]

    def alloc(nbytes, sector_size=512, spb=1):
        start = cursor[0]
        sectors = -(-nbytes // (sector_size * spb)) * spb
        cursor[0] += sectors + int(rng.integers(1, 40))
        return start

    def row(case, name, size, **kw):
        base = {h: "" for h in header}
        base.update(test_case=case, file_name=name, size=size if size is not None else "", type="deleted",
                    os=kw.pop("os", "ntfs"))
        base.update(kw)
        rows.append([base[h] for h in header])

    def contiguous(case, name, os="ntfs", **geom):
        size = int(rng.integers(600, 60_000))
        ss, spb = int(geom.get("sector_size", 512)), int(geom.get("sectors_per_block", 1))
        row(case, name, size, os=os, start_sector=alloc(size, ss, spb),
            **{k: v for k, v in geom.items()})

    def fragmented(case, name, pieces):
        sizes = [int(rng.integers(512, 9000)) for _ in range(pieces)]
        frags = ";".join(f"{alloc(s)}:{s}" for s in sizes)
        row(case, name, sum(sizes), fragments=frags)

    contiguous("DFR-01", "report.docx", os="ext")
    fragmented("DFR-02", "fragmented_two.jpg", 2)
    fragmented("DFR-03", "fragmented_many.zip", 5)
    for name in _NON_LATIN:
        contiguous("DFR-04", name, os="fat")
    fragmented("DFR-05", "first_fragmented.bin", 2)
    fragmented("DFR-05", "second_fragmented.bin", 3)
    for k in range(3):
        contiguous("DFR-11", f"dir_a/file_{k}.txt", sector_size=4096, sectors_per_block=2)
    for k in range(4):
        contiguous("DFR-12", f"dir_{k}/nested/file_{k}.dat")
    contiguous("DFR-14", "$Extend_object", sectors_per_block=8)
    row("DFR-14", "short_link", 0, dfr_blocks=f"{cursor[0]};{cursor[0] + 3}-{cursor[0] + 5}")

    row("DFR-01-MAC", "report.docx", None, access_time_stamp=_ts(rng), modify_time_stamp=_ts(rng),
        change_time_stamp=_ts(rng), deleted_time_stamp=_ts(rng))
    row("DFR-01-RECYCLE", "$R4Q2ZKX.docx", None)
    row("DFR-01-SIZE", "report.docx", int(rng.integers(1, 10_000_000)))
    for name in _NON_LATIN:
        row("DFR-04-CHAR", name, None, os="fat")
    for k in range(3):
        row("DFR-07-SIZE", f"overwritten_{k}.txt", int(rng.integers(1, 2_000_000)))
    row("DFR-11-NTFS", "alternate:stream", None)
    row("DFR-11-NTFS", "resident_small.txt", None)
    for k in range(2):
        row("DFR-11-SIZE", f"dir_a/file_{k}.txt", int(rng.integers(1, 500_000)))
    for case in DFR_UNSCOREABLE:
        row(case, f"{case.lower()}_no_sectors.bin", int(rng.integers(1, 1_000_000)))

    _write_csv(root / "dfr.csv", header, rows)
    _write_manifest(
        root / "manifest.toml", Suite.DELETED_FILE_RECOVERY, ["dfr.csv"],
        f"\n[geometry]\npartition_start_sector = {PARTITION_START}\nsector_size = 512\nsectors_per_block = 1\n",
    )


# file carving

def synthetic_image(rng: np.random.Generator, size: int = 64) -> Image.Image:
    """Smooth random RGB pattern: a few low-frequency cosines plus a blob."""
    y, x = np.mgrid[0:size, 0:size] / size
    channels = []
    for _ in range(3):
        acc = np.zeros((size, size))
        for _ in range(4):
            fx, fy = rng.uniform(0.5, 4.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            acc += rng.uniform(0.3, 1.0) * np.cos(2 * np.pi * (fx * x + fy * y) + phase)
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        acc += 2.0 * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / 0.02)
        acc = (acc - acc.min()) / (np.ptp(acc) or 1.0)
        channels.append(acc)
    arr = (np.stack(channels, axis=-1) * 255).round().astype(np.uint8)
    return Image.fromarray(arr, "RGB")


def encode_image(image: Image.Image, fmt: str) -> bytes:
    buf = io.BytesIO()
    if fmt == "gif":
        image.convert("P", palette=Image.Palette.ADAPTIVE, colors=64).save(buf, "GIF")
    elif fmt == "tiff":
        image.save(buf, "TIFF")
    else:
        image.save(buf, fmt.upper())
    return buf.getvalue()


def _box(btype: bytes, body: bytes) -> bytes:
    return struct.pack(">I4s", 8 + len(body), btype) + body


def synthetic_heic(rng: np.random.Generator, payload_size: int = 6000) -> bytes:
    """Structurally valid HEIF container (ftyp/meta/mdat) with opaque payload."""
    ftyp = _box(b"ftyp", b"heic" + struct.pack(">I", 0) + b"mif1heic")
    hdlr = _box(b"hdlr", b"\x00" * 8 + b"pict" + b"\x00" * 12 + b"\x00")
    meta = _box(b"meta", b"\x00\x00\x00\x00" + hdlr)
    mdat = _box(b"mdat", rng.integers(0, 256, size=payload_size, dtype=np.uint8).tobytes())
    return ftyp + meta + mdat


def _carving(root: Path, rng: np.random.Generator) -> None:
    rows = []
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    for case in CARVING_CASES:
        fmt = case.rsplit("-", 1)[-1]
        for k in range(2):
            name = f"{case}-{k}.{fmt}"
            data = synthetic_heic(rng) if fmt == "heic" else encode_image(synthetic_image(rng), fmt)
            (images / name).write_bytes(data)
            rows.append([case, f"images/{name}"])
    _write_csv(root / "carving.csv", ["test_case", "path"], rows)
    _write_manifest(root / "manifest.toml", Suite.FILE_CARVING, ["carving.csv"])


# windows registry

_REG_TYPES = ["REG_SZ", "REG_DWORD", "REG_BINARY", "REG_MULTI_SZ", "REG_QWORD", "REG_EXPAND_SZ"]


def synthetic_registry_rows(rng: np.random.Generator, n: int) -> list[list[str]]:
    roots = ["\\ROOT\\Software", "\\ROOT\\System\\ControlSet001", "\\ROOT\\Classes"]
    out = []
    for i in range(n):
        depth = int(rng.integers(1, 4))
        path = rng.choice(roots) + "".join(f"\\Key{int(rng.integers(0, 50))}" for _ in range(depth)) + f"\\Value{i}"
        rtype = str(rng.choice(_REG_TYPES))
        if rtype == "REG_DWORD":
            value = str(int(rng.integers(0, 2**32)))
        elif rtype == "REG_QWORD":
            value = str(int(rng.integers(0, 2**62)))
        elif rtype == "REG_BINARY":
            value = rng.integers(0, 256, size=int(rng.integers(1, 24)), dtype=np.uint8).tobytes().hex()
        elif rtype == "REG_MULTI_SZ":
            value = "\n".join(f"Entry{int(rng.integers(0, 99))}" for _ in range(int(rng.integers(1, 4))))
        else:
            value = f"C:\\Program Files\\App{i}\\Data {int(rng.integers(0, 1000))}"
        out.append([path, rtype, value, _ts(rng)])
    return out


def _registry(root: Path, rng: np.random.Generator) -> None:
    rows = []
    dumps = root / "dumps"
    for case in REGISTRY_CASES:
        variations = 2 if case in ("MR-01", "NR-03") else 1
        for v in range(variations):
            name = f"{case}-{v}.csv"
            _write_csv(dumps / name, ["PATH", "TYPE", "VALUE", "MTIME"],
                       synthetic_registry_rows(rng, int(rng.integers(15, 60))))
            rows.append([case, f"dumps/{name}"])
    _write_csv(root / "registry.csv", ["test_case", "path"], rows)
    _write_manifest(root / "manifest.toml", Suite.WINDOWS_REGISTRY, ["registry.csv"])


# sqlite

def _make_db(path: Path, rng: np.random.Generator, page_size: int, encoding: str, wal: bool):
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    conn.execute(f"PRAGMA page_size = {page_size}")
    conn.execute(f"PRAGMA encoding = '{encoding}'")
    if wal:
        conn.execute("PRAGMA journal_mode = WAL")
    conn.execute("CREATE TABLE contacts (id INTEGER PRIMARY KEY, name TEXT, phone TEXT)")
    conn.execute("CREATE TABLE messages (id INTEGER PRIMARY KEY, contact_id INTEGER, body TEXT, sent INTEGER)")
    n = 40
    for i in range(1, n + 1):
        conn.execute("INSERT INTO contacts VALUES (?, ?, ?)", (i, f"person {i}", f"+1555{i:07d}"))
        conn.execute("INSERT INTO messages VALUES (?, ?, ?, ?)", (i, i, "x" * int(rng.integers(10, 200)), i))
    conn.commit()
    ids = rng.permutation(np.arange(1, n + 1))
    deleted = sorted(int(i) for i in ids[:5])
    updated = sorted(int(i) for i in ids[5:9])
    conn.executemany("DELETE FROM contacts WHERE id = ?", [(i,) for i in deleted])
    conn.executemany("UPDATE contacts SET phone = 'changed' WHERE id = ?", [(i,) for i in updated])
    conn.commit()
    if wal:
        conn.execute("PRAGMA wal_checkpoint(TRUNCATE)")
    conn.close()
    return deleted, updated


def _sqlite(root: Path, rng: np.random.Generator) -> None:
    header = ["test_case", "database_name", "database_path", "journal_mode", "table", "columns", "row_count",
              "deleted_row_ids", "updated_row_ids", "source_file"]
    rows = []

    def row(**kw):
        rows.append([kw.get(h, "") for h in header])

    specs = [("contacts.db", 4096, "UTF-8", False), ("chat_wal.db", 1024, "UTF-16le", True)]
    for name, page_size, encoding, wal in specs:
        deleted, updated = _make_db(root / "db" / name, rng, page_size, encoding, wal)
        path = f"db/{name}"
        row(test_case="SFT-01", database_name=name, database_path=path)
        row(test_case="SFT-02", database_name=name, database_path=path)
        row(test_case="SFT-03", database_name=name, deleted_row_ids=";".join(map(str, deleted)),
            updated_row_ids=";".join(map(str, updated)))
        row(test_case="SFT-04", database_name=name, source_file=name)
    _write_csv(root / "sqlite.csv", header, rows)
    _write_manifest(root / "manifest.toml", Suite.SQLITE, ["sqlite.csv"])


def build_corpus(root: "str | Path", seed: int = SEED) -> Corpus:
    """Write all five synthetic corpora under ``root``; deterministic per seed."""
    root = Path(root)
    builders = [
        (Suite.STRING_SEARCH, _fss),
        (Suite.DELETED_FILE_RECOVERY, _dfr),
        (Suite.FILE_CARVING, _carving),
        (Suite.WINDOWS_REGISTRY, _registry),
        (Suite.SQLITE, _sqlite),
    ]
    for i, (suite, build) in enumerate(builders):
        build(root / suite.value, np.random.default_rng(seed + i))
    return Corpus(root)


def load_corpus(store, corpus: Corpus) -> dict:
    """Ingest every suite of ``corpus`` into ``store``; returns counts per suite."""
    from .ingest import ingest

    return {suite: ingest(store, corpus.manifest(suite)) for suite in Suite}
