"""modwatch: community-evolution analytics and proactive moderation flagging.

Pipeline stages: ingest platform event logs into monthly community states,
build TF-IDF vocabulary and active-user overlap vectors, measure evolution
with rank-biased overlap over euclidean neighbor rankings, extract
leakage-gated quarterly features, train interpretable classifiers with
imbalance-aware sampling, and run a human-in-the-loop review service that
learns from administrator decisions.
"""

__version__ = "0.1.0"
