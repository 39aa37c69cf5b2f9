# coding: utf-8

# # String search and deleted-file recovery
#
# We build the synthetic mini-corpus, load it into an in-memory store and
# score a couple of hand-written tool reports.

# In[1]:

import tempfile

from dfbench import Evaluator, Store
from dfbench.roundtrip import reference_payloads
from dfbench.scorers.dfr import DfrGeometry, DfrRecoveredFile, blocks_for_file
from dfbench.synthetic import build_corpus, load_corpus

workdir = tempfile.mkdtemp(prefix="dfbench-demo-")
corpus = build_corpus(workdir)
store = Store()
print(load_corpus(store, corpus))
evaluator = Evaluator(store, record=False)


# ## String search
#
# Ground truth for FT-SS-01 is a set of planted lines, each tagged with a
# four-digit identifier. A reference report reproduces them exactly.

# In[2]:

os_name, lines = reference_payloads(store, "FT-SS-01")[0]
print(os_name, lines[:3])
print(evaluator.evaluate("FT-SS-01", (os_name, lines)).metrics)


# Drop half the lines and add some noise:

# In[3]:

noisy = lines[::2] + ["no identifier here", "9999 not planted"]
result = evaluator.string_search("FT-SS-01", os_name, noisy)
print(result.counts, result.metrics)


# ## Deleted-file recovery
#
# Block sets are sector offsets from the partition start. A 3000-byte file
# starting at absolute sector 2100 on a partition at 2048, with 4 KiB blocks:

# In[4]:

geom = DfrGeometry(partition_start_sector=2048, sector_size=512, sectors_per_block=8)
print(blocks_for_file(2100, 3000, geom))


# Recovering every file of DFR-01 exactly gives F1 = 1. Shifting one file by a
# single block turns it into both a false positive and a false negative.

# In[5]:

files = reference_payloads(store, "DFR-01")[0]
print(evaluator.evaluate("DFR-01", files).metrics)

shifted = list(files)
shifted[0] = DfrRecoveredFile(files[0].file_name, blocks=frozenset(b + 1 for b in files[0].blocks))
print(evaluator.evaluate("DFR-01", shifted).counts)

store.close()
