"""Command-line orchestration: configuration, stages, manifests, and the
synthetic-corpus generator used for verification."""
