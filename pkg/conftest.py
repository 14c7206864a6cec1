"""Root conftest.py for pytest.

Tests live inline in every module under src/services; reference material under
examples/ is never collected.
"""

collect_ignore = [
    "examples",
]
collect_ignore_glob = [
    "examples/*",
]
