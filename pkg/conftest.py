"""
pytest wiring, mirroring what vsc-install's 'python setup.py test' sets up:
vsc-install derives the repository base dir from sys.argv[0] (normally setup.py), which is the
pytest executable here, and puts the scripts dir on sys.path so scripts can be imported.
"""
import os
import sys

_BASE_DIR = os.path.dirname(os.path.abspath(__file__))

os.environ.setdefault('REPO_BASE_DIR', _BASE_DIR)
sys.path.insert(0, os.path.join(_BASE_DIR, 'bin'))

# examples/ is a read-only reference pack, not part of this package (also --ignore'd for pytest).
# Passed as its own option: vsc-install comma-joins PROSPECTOR_IGNORE_PATHS, which current prospector
# takes as one literal path.
from vsc.install.commontest import PROSPECTOR_OPTIONS  # noqa: E402 pylint: disable=wrong-import-position

PROSPECTOR_OPTIONS.extend(['--ignore-paths', 'examples'])
