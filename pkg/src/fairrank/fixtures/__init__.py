"""Tiny bundled sample datasets, one per supported real-data schema.

Each file has 100 rows (4 tasks of 25) in the standard ingestion format;
they stand in for the full public datasets in smoke tests and examples.
"""

from importlib.resources import files

# target column name per schema; task and protected columns use the defaults
FIXTURE_SCHEMAS = {
    "crime_sample": "crime_rate",
    "income_sample": "income",
    "wine_sample": "alcohol",
    "student_sample": "final_grade",
}
FIXTURE_NAMES = tuple(FIXTURE_SCHEMAS)


def fixture_path(name: str) -> str:
    if name not in FIXTURE_SCHEMAS:
        raise KeyError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    return str(files(__package__) / f"{name}.csv")


def fixture_target_col(name: str) -> str:
    if name not in FIXTURE_SCHEMAS:
        raise KeyError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    return FIXTURE_SCHEMAS[name]
