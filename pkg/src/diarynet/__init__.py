"""diarynet: dated diary transcriptions -> curated person co-occurrence networks.

The pipeline runs in stages: parse a transcription corpus into dated entries,
extract person mentions against a gazetteer, resolve mentions to canonical
person identities (with a human-in-the-loop decision log), build and filter a
co-occurrence graph, detect communities, compute a layout, and export the
result.  Every stage appends to a hash-chained provenance ledger so a project
can be replayed and checked byte for byte.
"""

__version__ = "0.1.0"
