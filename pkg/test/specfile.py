#
# Copyright 2025-2025 Ghent University
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
Tests for the vsc.mocp.specfile module.
"""
import gzip
import os
import tempfile

from vsc.install.testing import TestCase

from vsc.mocp.exceptions import SpecError, SpecIOError
from vsc.mocp.specfile import canonical, read_structured, write_text


class TestSpecFile(TestCase):
    """Tests for reading and writing spec files."""

    def setUp(self):
        super().setUp()
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        super().tearDown()

    def test_plain_and_gzipped(self):
        """Both plain and gzipped JSON documents are read."""
        document = '{"name": "B4", "states": ["tracking"], "params": {"retries": 3}}'
        plain = os.path.join(self.tmpdir, 'plain.json')
        with open(plain, 'w') as fih:
            fih.write(document)
        zipped = os.path.join(self.tmpdir, 'zipped.json.gz')
        with gzip.open(zipped, 'wb') as fih:
            fih.write(document.encode('utf-8'))

        expected = {'name': 'B4', 'states': ['tracking'], 'params': {'retries': 3}}
        self.assertEqual(read_structured(plain), expected)
        self.assertEqual(read_structured(zipped), expected)

    def test_errors(self):
        """Unreadable files and invalid documents raise different errors."""
        self.assertErrorRegex(SpecIOError, 'Cannot read', read_structured, os.path.join(self.tmpdir, 'missing.json'))

        broken = os.path.join(self.tmpdir, 'broken.json')
        with open(broken, 'w') as fih:
            fih.write('{"name": ')
        self.assertErrorRegex(SpecError, 'Cannot decode JSON', read_structured, broken)

    def test_write_text(self):
        """Parent directories are created."""
        filename = os.path.join(self.tmpdir, 'reports', 'run.txt')
        write_text(filename, 'EVT|1|login|user=u1||normal\n')
        with open(filename) as fih:
            self.assertEqual(fih.read(), 'EVT|1|login|user=u1||normal\n')

        blocker = os.path.join(self.tmpdir, 'file')
        write_text(blocker, '')
        self.assertErrorRegex(SpecIOError, 'Cannot write', write_text, os.path.join(blocker, 'run.txt'), 'x')

    def test_canonical(self):
        """Keys are sorted, so insertion order does not matter."""
        one = canonical({'b': [1, {'y': True, 'x': None}], 'a': 'c1'})
        two = canonical({'a': 'c1', 'b': [1, {'x': None, 'y': True}]})
        self.assertEqual(one, two)
        self.assertEqual(one, '{"a":"c1","b":[1,{"x":null,"y":true}]}')
