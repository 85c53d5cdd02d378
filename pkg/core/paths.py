# core/paths.py
# Single home for all file-path constants used across the toolkit.
# Import from here so changing a folder name is a one-line edit.

import os
from datetime import datetime

# ── root ─────────────────────────────────────────────────────────────────────
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# ── directories ──────────────────────────────────────────────────────────────
PROBLEMS_DIR = os.path.join(ROOT, 'problems')
RUNS_DIR     = os.path.join(ROOT, 'runs')


def problem_file(name):
    """Return path to problems/<name>.json (the bundled examples)."""
    if not name.endswith('.json'):
        name = f'{name}.json'
    return os.path.join(PROBLEMS_DIR, name)


def run_dir(date_str=None):
    """Return path to runs/YYYY-MM-DD/ for a given date string."""
    if date_str is None:
        date_str = datetime.today().strftime('%Y-%m-%d')
    return os.path.join(RUNS_DIR, date_str)


def run_log(date_str=None):
    """Return path to runs/YYYY-MM-DD/run.log."""
    return os.path.join(run_dir(date_str), 'run.log')


def field_csv(digest, date_str=None):
    """Return path to runs/YYYY-MM-DD/field_<digest8>.csv for a vortex field dump."""
    return os.path.join(run_dir(date_str), f'field_{digest[:8]}.csv')
