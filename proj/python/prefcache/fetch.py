# Copyright 2026 The Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Downloads and checksum-verifies the MovieLens-1M archive.

    python -m prefcache.fetch --dest ~/data

leaves ~/data/ml-1m/{ratings,movies,users}.dat. Point the acceptance suite
at it with PREFCACHE_MOVIELENS_DIR=~/data/ml-1m.
"""

import argparse
import hashlib
import os
import shutil
import sys
import tempfile
import urllib.request
import zipfile

URL = "https://files.grouplens.org/datasets/movielens/ml-1m.zip"
MD5 = "c4d9eecfca2ab87c1945afe126590906"


def md5sum(path):
    digest = hashlib.md5()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def fetch(dest, url=URL, expected_md5=MD5):
    """Returns the extracted ml-1m directory, downloading only if needed."""
    target = os.path.join(dest, "ml-1m")
    if os.path.exists(os.path.join(target, "ratings.dat")):
        return target
    os.makedirs(dest, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=dest) as tmp:
        archive = os.path.join(tmp, "ml-1m.zip")
        with urllib.request.urlopen(url, timeout=60) as response, \
                open(archive, "wb") as out:
            shutil.copyfileobj(response, out)
        actual = md5sum(archive)
        if expected_md5 and actual != expected_md5:
            raise ValueError("checksum mismatch: got %s, expected %s" %
                             (actual, expected_md5))
        with zipfile.ZipFile(archive) as z:
            z.extractall(tmp)
        os.replace(os.path.join(tmp, "ml-1m"), target)
    return target


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default=".")
    args = parser.parse_args(argv)
    try:
        print(fetch(args.dest))
    except (OSError, ValueError) as e:
        print("fetch failed: %s" % e, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
