"""
Driving the command-line tool
=============================

The ``hardylab`` entry point reads an INI config, writes CSV/JSON files
and reports through its exit code.  Here it is called in-process.
"""

import json
import tempfile
from pathlib import Path

from hardylab.cli import main

work = Path(tempfile.mkdtemp())
(work / "terracini.ini").write_text("""
[meta]
version = 1
[problem]
N = 3
p = 2
mu = 0.1875
[shooting]
r_min = 1e-4
r_max = 1e4
amplitude = 0.9306048591020996
""")

print("exponents ->", main(["exponents", "--n", "3", "--p", "2", "--mu", "0.1875"]))
print("solve ->", main(["solve", str(work / "terracini.ini"), "--out", str(work)]))
print("verify ->", main(["verify", "gradient-decay", str(work / "terracini.ini"), "--out", str(work)]))
rep = json.loads((work / "gradient-decay.json").read_text())
print("pass:", rep["pass"], " c_emp_max:", rep["c_emp_max"])
print("files:", sorted(p.name for p in work.iterdir()))
