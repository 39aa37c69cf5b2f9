# coding: utf-8

# # Scoring over HTTP and in batch
#
# The same evaluator backs the REST service and the batch pipeline, so both
# return bit-identical metrics.

# In[1]:

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from dfbench import Evaluator, Store, Suite
from dfbench.api import create_app, encode_request
from dfbench.batch import run_batch, run_suite, write_batch_csv
from dfbench.roundtrip import reference_payloads
from dfbench.synthetic import SUPPORTED_CASES, build_corpus, load_corpus

workdir = Path(tempfile.mkdtemp(prefix="dfbench-demo-"))
store = Store(workdir / "store.sqlite3")
load_corpus(store, build_corpus(workdir / "corpus"))


# ## The service
#
# Every 2xx response is also written to the append-only results log.

# In[2]:

client = TestClient(create_app(Evaluator(store)))
payload = reference_payloads(store, "FT-SS-03")[0]
path, request = encode_request("FT-SS-03", payload, tool="grep-like", job_id="demo-1")
response = client.post(path, **request)
print(path, response.status_code, response.json())
print(len(store.list_results()), "result(s) logged")


# ## One batch file
#
# A batch CSV holds many tool runs for one suite; the report has one row per
# (test case, tool) and a final suite mean.

# In[3]:

items = [(case, "reference", p) for case in SUPPORTED_CASES[Suite.SQLITE]
         for p in reference_payloads(store, case)]
src = write_batch_csv(workdir / "sdr.csv", Suite.SQLITE, items)
status = run_batch(Evaluator(store, record=False), "SFT-01", src, workdir / "sdr_report.csv")
print("exit", status)
print((workdir / "sdr_report.csv").read_text())


# ## A whole suite directory
#
# One CSV per test case; the suite report is written only when every file
# scores cleanly.

# In[4]:

suite_dir = workdir / "fss"
for case in SUPPORTED_CASES[Suite.STRING_SEARCH]:
    write_batch_csv(suite_dir / f"{case}.csv", Suite.STRING_SEARCH,
                    [(case, "reference", p) for p in reference_payloads(store, case)])
print("exit", run_suite(Evaluator(store, record=False), Suite.STRING_SEARCH, suite_dir, workdir / "fss_report.csv"))
print((workdir / "fss_report.csv").read_text().splitlines()[-1])

store.close()
