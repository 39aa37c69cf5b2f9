# coding: utf-8

# # Counting findings and turning them into scores
#
# Every scorer in dfbench ends the same way: a triple of true positives,
# false positives and false negatives. This walk-through starts there.

# In[1]:

from dfbench import MatchCounts, Suite, aggregate_bench, aggregate_suite, compute_metrics
from dfbench.metrics import average_sub_cases, format_score


# A tool that found 8 of 10 planted artefacts and reported 2 extra ones:

# In[2]:

m = compute_metrics(MatchCounts(tp=8, fp=2, fn=2))
print(m)


# When there is nothing to find and the tool reports nothing, the score is
# perfect. Any other empty denominator scores zero.

# In[3]:

for counts in [MatchCounts(0, 0, 0), MatchCounts(0, 3, 0), MatchCounts(0, 0, 4)]:
    print(counts, "->", compute_metrics(counts))


# ## From test cases to a suite score
#
# Sub-cases such as DFR-01-MAC are folded into their parent case first, then
# the suite score is the plain mean of per-case F1.

# In[4]:

per_case = [
    ("DFR-01", compute_metrics(MatchCounts(4, 0, 0))),
    ("DFR-01-MAC", compute_metrics(MatchCounts(1, 1, 0))),
    ("DFR-02", compute_metrics(MatchCounts(3, 1, 2))),
]
print(average_sub_cases(per_case))
dfr = aggregate_suite(Suite.DELETED_FILE_RECOVERY, average_sub_cases(per_case))
print("DFR suite score:", format_score(dfr.score))


# The bench score needs all five suites, each exactly once.

# In[5]:

suites = [dfr] + [
    aggregate_suite(s, [("x", compute_metrics(MatchCounts(1, 0, 0)))])
    for s in Suite if s is not Suite.DELETED_FILE_RECOVERY
]
bench = aggregate_bench(suites)
print("bench:", format_score(bench.score))
