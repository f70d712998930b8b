#!/usr/bin/env python3
"""End-to-end checks of the bcheck command line: exit codes and reports."""

import os
import subprocess
import sys
import unittest

BCHECK = sys.argv[1] if len(sys.argv) > 1 else "bcheck"
SAMPLES = sys.argv[2] if len(sys.argv) > 2 else "samples"


def run(*args, env=None):
    full = [BCHECK] + [os.path.join(SAMPLES, a) if a.endswith((".ol", ".ctx")) else a for a in args]
    merged = dict(os.environ, BCHECK_COLOR="0")
    merged.update(env or {})
    return subprocess.run(full, capture_output=True, text=True, env=merged, timeout=600)


class Check(unittest.TestCase):
    def test_nil_under_empty(self):
        r = run("check", "empty.ctx", "nil.ol")
        self.assertEqual((r.returncode, r.stdout), (0, "{ }\n"))

    def test_parallel_nil(self):
        r = run("check", "two-empty.ctx", "nil-par-nil.ol")
        self.assertEqual((r.returncode, r.stdout), (0, "{ } & { }\n"))

    def test_guard_not_bool(self):
        r = run("check", "empty.ctx", "int-guard.ol")
        self.assertEqual(r.returncode, 1)
        self.assertTrue(r.stdout.startswith("GuardNotBool:"), r.stdout)

    def test_span_of_offending_behaviour(self):
        r = run("check", "empty.ctx", "late-guard.ol")
        self.assertEqual(r.returncode, 1)
        self.assertIn("late-guard.ol:2:1-2:17 (seq.2): while [ x0 ] nil", r.stdout)

    def test_derive_prints_tree(self):
        r = run("derive", "two-empty.ctx", "nil-par-nil.ol")
        self.assertEqual(r.returncode, 0)
        self.assertEqual(
            r.stdout,
            "{ } & { }\n"
            "t-par  { } & { } ⊢ nil | nil ▷ { } & { }\n"
            "  t-nil  { } ⊢ nil ▷ { }\n"
            "  t-nil  { } ⊢ nil ▷ { }\n",
        )
        self.assertEqual(run("check", "--derive", "two-empty.ctx", "nil-par-nil.ol").stdout, r.stdout)

    def test_paper_core(self):
        self.assertEqual(run("check", "--paper-core", "two-empty.ctx", "nil-par-nil.ol").returncode, 0)
        r = run("check", "--paper-core", "empty.ctx", "assign.ol")
        self.assertEqual(r.returncode, 1)
        self.assertTrue(r.stdout.startswith("UnsupportedConstruct:"))

    def test_paths(self):
        r = run("check", "--paths", "order.ctx", "order.ol")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(
            r.stdout,
            "{ x0 : int, x2 : string, x1 : bool }\n"
            "# x0 = amount.fruit.apple\n# x1 = amount\n# x2 = amount.fruit.description\n",
        )

    def test_ports(self):
        r = run("check", "ports.ctx", "ports.ol")
        self.assertEqual(r.returncode, 0, r.stdout)
        self.assertEqual(r.stdout, "{ o : <int>, s @ l : <int, bool>, x0 : int, x1 : bool }\n")

    def test_syntax_error(self):
        r = run("check", "empty.ctx", "syntax-error.ol")
        self.assertEqual(r.returncode, 2)
        self.assertIn("syntax-error.ol:1:7", r.stderr)
        self.assertEqual(r.stdout, "")

    def test_duplicate_declaration(self):
        r = run("check", "duplicate.ctx", "nil.ol")
        self.assertEqual(r.returncode, 2)
        self.assertIn("declared twice", r.stderr)

    def test_missing_file_and_usage(self):
        self.assertEqual(run("check", "empty.ctx", "absent.ol").returncode, 2)
        self.assertEqual(run("frobnicate").returncode, 2)
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("--help").returncode, 0)

    def test_color(self):
        plain = run("check", "empty.ctx", "syntax-error.ol")
        colored = run("check", "empty.ctx", "syntax-error.ol", env={"BCHECK_COLOR": "1"})
        self.assertNotIn("\x1b[", plain.stderr)
        self.assertIn("\x1b[", colored.stderr)


class Congruent(unittest.TestCase):
    def test_par_comm(self):
        r = run("congruent", "nil-par-assign.ol", "assign-par-nil.ol")
        self.assertEqual((r.returncode, r.stdout), (0, "root  ParComm\n"))

    def test_identical(self):
        r = run("congruent", "mixed-par.ol", "mixed-par.ol")
        self.assertEqual((r.returncode, r.stdout), (0, ""))

    def test_trailing_nil(self):
        r = run("congruent", "assign-seq-nil.ol", "assign.ol")
        self.assertEqual((r.returncode, r.stdout), (1, "not congruent\n"))

    def test_syntax_error(self):
        self.assertEqual(run("congruent", "syntax-error.ol", "nil.ol").returncode, 2)


class Normalize(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(run("normalize", "nil-seq-nil.ol").stdout, "nil\n")
        self.assertEqual(run("normalize", "nil.ol").stdout, "nil\n")
        self.assertEqual(run("normalize", "mixed-par.ol").stdout, "x0 = true | x1 = true\n")

    def test_deterministic(self):
        self.assertEqual(run("normalize", "mixed-par.ol").stdout, run("normalize", "mixed-par.ol").stdout)


class Selftest(unittest.TestCase):
    def test_zero(self):
        r = run("selftest", "--max-size", "0")
        self.assertEqual(r.returncode, 0, r.stdout)
        self.assertIn("oracle: checked 0, failures 0", r.stdout)

    def test_four(self):
        r = run("selftest", "--max-size", "4")
        self.assertEqual(r.returncode, 0, r.stdout)
        for line in r.stdout.splitlines():
            if ": checked " in line:
                self.assertNotIn("checked 0,", line)

    def test_injected_fault(self):
        for fault in ("swap-if", "break-seq", "par-comm-no-swap"):
            r = run("selftest", "--max-size", "3", "--inject-fault", fault)
            self.assertEqual(r.returncode, 1, fault)
            self.assertIn("counterexample:", r.stdout)

    def test_bounds(self):
        self.assertEqual(run("selftest", "--max-size", "9").returncode, 2)
        self.assertEqual(run("selftest", "--max-size", "2", "--inject-fault", "nope").returncode, 2)


if __name__ == "__main__":
    unittest.main(argv=[sys.argv[0], "-v"])
