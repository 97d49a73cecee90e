#
# Copyright 2025-2026 Ghent University
#
# This file is part of vsc-mocp,
# originally created by the HPC team of Ghent University (http://ugent.be/hpc/en),
# with support of Ghent University (http://ugent.be/hpc),
# the Flemish Supercomputer Centre (VSC) (https://www.vscentrum.be),
# the Flemish Research Foundation (FWO) (http://www.fwo.be/en)
# and the Department of Economy, Science and Innovation (EWI) (http://www.ewi-vlaanderen.be/en).
#
# https://github.com/hpcugent/vsc-mocp
#
# vsc-mocp is free software: you can redistribute it and/or modify
# it under the terms of the GNU Library General Public License as
# published by the Free Software Foundation, either version 2 of
# the License, or (at your option) any later version.
#
# vsc-mocp is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU Library General Public License for more details.
#
# You should have received a copy of the GNU Library General Public License
# along with vsc-mocp. If not, see <http://www.gnu.org/licenses/>.
#
"""
Reading and writing of spec, scenario and report files.

Spec files are JSON documents, optionally gzipped.

    - read_structured: load a (gzipped) JSON document
    - write_text: store a report
    - canonical: deterministic serialisation used to compare runtime instances
"""
import gzip
import os

import jsonpickle

from vsc.utils import fancylogger
from vsc.mocp.exceptions import SpecError, SpecIOError

log = fancylogger.getLogger(__name__, fname=False)


def read_structured(filename):
    """Load the JSON document stored in filename.

    The file is first read as gzipped JSON; if that fails, it is read as plain JSON.

    @type filename: string

    @returns: the decoded document (dicts, lists and scalars)

    @raise SpecIOError: the file cannot be read
    @raise SpecError: the contents is not valid JSON
    """
    try:
        with open(filename, 'rb') as fih:
            try:
                with gzip.GzipFile(mode='rb', fileobj=fih) as g:
                    raw = g.read()
            except OSError:
                log.debug("File %s is not gzipped, reading it as plain JSON", filename)
                fih.seek(0)
                raw = fih.read()
    except OSError as err:
        msg = f"Cannot read {filename}: {err}"
        log.error(msg)
        raise SpecIOError(msg) from err

    try:
        return jsonpickle.decode(raw.decode('utf-8'))
    except (ValueError, UnicodeDecodeError) as err:
        msg = f"Cannot decode JSON from {filename} [{err}]"
        log.error(msg)
        raise SpecError(msg) from err


def write_text(filename, text):
    """Write text to filename, creating the parent directory if needed.

    @raise SpecIOError: the file cannot be written
    """
    dirname = os.path.dirname(filename)
    try:
        if dirname and not os.path.exists(dirname):
            os.makedirs(dirname)
        with open(filename, 'w', encoding='utf8') as fih:
            fih.write(text)
    except OSError as err:
        msg = f"Cannot write {filename}: {err}"
        log.error(msg)
        raise SpecIOError(msg) from err

    log.info("Wrote %s", filename)


def canonical(obj):
    """Return a deterministic text rendering of obj (plain data only)."""
    # keys are only sorted through the backend options
    backend = jsonpickle.backend.JSONBackend()
    backend.set_encoder_options('json', sort_keys=True, separators=(',', ':'))
    return jsonpickle.encode(obj, unpicklable=False, make_refs=False, backend=backend)
