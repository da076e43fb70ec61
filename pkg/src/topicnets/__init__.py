"""topicnets: partition a bibliographic corpus into topical fields and
measure how each field's co-authorship network assembles over time."""

__version__ = "0.1.0"
