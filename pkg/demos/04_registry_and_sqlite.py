# coding: utf-8

# # Registry exports and SQLite forensics

# In[1]:

import sqlite3
import tempfile
from pathlib import Path

from dfbench.scorers.registry import RegistryRow, row_keys, score_registry_keys
from dfbench.scorers.sqlite import (
    SqliteConfigReport,
    SqliteRowRecoveryReport,
    read_sqlite_header,
    score_sft01,
    score_sft03,
)


# ## Registry rows
#
# Rows are compared on path, type and rendered value. Paths are
# case-insensitive; modification times are ignored by default.

# In[2]:

gt = [
    RegistryRow(r"HKLM\Software\Vendor", "REG_SZ", "alpha", "2020-01-01T00:00:00Z"),
    RegistryRow(r"HKLM\Software\Vendor\Build", "REG_DWORD", "42", ""),
]
tool = [
    RegistryRow(r"hklm\software\vendor", "REG_SZ", "alpha", ""),
    RegistryRow(r"HKLM\Software\Vendor\Build", "REG_DWORD", "43", ""),
]
print(score_registry_keys(row_keys(gt), row_keys(tool)))


# ## Reading an SQLite header
#
# The first 100 bytes of a database carry page size, page count and text
# encoding.

# In[3]:

path = Path(tempfile.mkdtemp()) / "evidence.sqlite"
con = sqlite3.connect(path)
con.execute("PRAGMA page_size = 8192")
con.execute("PRAGMA encoding = 'UTF-16le'")
con.execute("CREATE TABLE notes (id INTEGER PRIMARY KEY, body TEXT)")
con.executemany("INSERT INTO notes (body) VALUES (?)", [(f"note {i}",) for i in range(200)])
con.commit()
con.close()

header = read_sqlite_header(path.read_bytes())
print(header)


# ## SFT-01: configuration parameters
#
# Each of the five parameters is a hit or a false positive. Nothing is ever a
# false negative here, so recall is either 0 or 1.

# In[4]:

expected = {"page_size": 8192, "journal_mode": "delete", "page_count": header.page_count,
            "file_hash": "ab" * 32, "text_encoding": "utf16le"}
report = SqliteConfigReport(page_size=8192, journal_mode="wal", page_count=header.page_count,
                            file_hash="ab" * 32, text_encoding="utf16le")
print(score_sft01(expected, report))


# ## SFT-03: recovered row ids
#
# This test keeps the inverted convention: missing ground-truth ids are
# counted as FP and unexpected ids as FN.

# In[5]:

gt_rows = {"deleted_row_ids": [1, 2], "updated_row_ids": [3, 4]}
print(score_sft03(gt_rows, SqliteRowRecoveryReport("db", frozenset({1, 2}), frozenset({3}))))
print(score_sft03(gt_rows, SqliteRowRecoveryReport("db", frozenset({1, 2, 9}), frozenset({3, 4}))))
