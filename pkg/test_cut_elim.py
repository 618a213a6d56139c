import os
import re
import unittest

from config.config import EQUALITY_TOLERANCE, EXAMPLES_FOLDER
from utils.cut_elim import (Redex, RedexKind, admissible_redexes, find_redexes, is_normal,
                            normalize, one_step_reducts, rejoin_within, settle_exchanges, step,
                            step_bound, trace_lines, weight)
from utils.errors import PreconditionError, StaleRedexError
from utils.formula import Polarity, contexts_for
from utils.matrix import approx_equal
from utils.proof import check, conclusion, has_cut, proofs_equal, rule_count
from utils.proof_text import parse_proof, print_proof
from utils.qiam import semantics_relative
from utils.random_proofs import ProofGenerator

CORPUS_SIZE = 1000
CONFLUENCE_SIZE = 300
RANDOM_RUNS = 20
ANY_REDEX_PROOFS = 100
ANY_REDEX_RUNS = 5


def load_example(name: str) -> str:
    with open(os.path.join(EXAMPLES_FOLDER, name), "r", encoding="utf-8") as f:
        return f.read()


def negative_contexts(p):
    return [(k, c) for k, f in enumerate(conclusion(p)) for c, pol in contexts_for(f) if pol is Polarity.NEGATIVE]


class TestReductionSchemas(unittest.TestCase):

    def test_quantum_principal_then_axiom(self):
        p = parse_proof("(cut 2 1 (q 1 H (ax a)) (q 1 X (ax a)))")
        trace = normalize(p)
        self.assertEqual(print_proof(trace.final), "(q 1 (dot X H) (ax a))")
        self.assertEqual(trace_lines(trace), ["1 QuantumPrincipal ε 25 -> 10", "2 AxiomRed 0 10 -> 2"])
        self.assertTrue(trace.is_monotone)

    def test_eta_box(self):
        self.assertEqual(print_proof(normalize(parse_proof("(ax []a)")).final), "(q 1 I1 (ax a))")

    def test_eta_diamond(self):
        p = parse_proof("(ax <>a)")
        final = normalize(p).final
        self.assertEqual(print_proof(final), "(ex 2 1 (q 1 I1 (ax ~a)))")
        self.assertEqual(conclusion(final), conclusion(p))

    def test_eta_uses_whole_run(self):
        redexes = find_redexes(parse_proof("(ax [][]<>a)"))
        self.assertEqual(redexes, [Redex(RedexKind.ETA, (), ("box", 2))])

    def test_q_contract(self):
        final = normalize(parse_proof("(q 1 H (q 2 CNOT (ax a)))")).final
        self.assertEqual(print_proof(final), "(q 3 (kron CNOT H) (ax a))")

    def test_axiom_cut(self):
        self.assertEqual(print_proof(normalize(parse_proof("(cut 2 1 (ax a) (ax a))")).final), "(ax a)")

    def test_multiplicative_principal(self):
        p = parse_proof("(cut 3 2 (tensor 2 2 (ax a) (ax b)) (par 1 2 (tensor 1 1 (ax ~a) (ax ~b))))")
        self.assertTrue(check(p).ok)
        kinds = [r.kind for r in find_redexes(p)]
        self.assertIn(RedexKind.MULT_PRINCIPAL, kinds)
        trace = normalize(p)
        self.assertFalse(has_cut(trace.final))
        self.assertEqual(conclusion(trace.final), conclusion(p))

    def test_commute_through_tensor(self):
        p = parse_proof("(cut 1 1 (par 2 3 (tensor 2 2 (ax a) (ax b))) (tensor 1 2 (ax a) (ax b)))")
        self.assertTrue(check(p).ok)
        kinds = [r.kind for r in admissible_redexes(p)]
        self.assertEqual(kinds, [RedexKind.COMMUTE_TENSOR_LEFT])
        trace = normalize(p)
        self.assertFalse(has_cut(trace.final))
        self.assertEqual(conclusion(trace.final), conclusion(p))

    def test_stale_redex(self):
        p = parse_proof("(cut 2 1 (ax a) (ax a))")
        with self.assertRaises(StaleRedexError):
            step(p, Redex(RedexKind.QUANTUM_PRINCIPAL, (), (1,)))
        with self.assertRaises(StaleRedexError):
            step(p, Redex(RedexKind.AXIOM, (0, 0, 0), ("right",)))

    def test_unknown_strategy(self):
        with self.assertRaises(PreconditionError):
            normalize(parse_proof("(ax a)"), strategy="outermost")

    def test_settle_absorbs_swapped_axiom(self):
        self.assertEqual(print_proof(settle_exchanges(parse_proof("(ex 2 1 (ax a))"))), "(ax ~a)")
        self.assertEqual(print_proof(settle_exchanges(parse_proof("(ex 1 2 (q 1 H (ax a)))"))), "(q 1 H (ax a))")

    def test_settle_orients_axioms_under_par_and_tensor(self):
        for a, b in (("(par 1 2 (ax ~a))", "(par 2 1 (ax a))"),
                     ("(tensor 1 2 (ax ~a) (ax b))", "(tensor 2 2 (ax a) (ax b))")):
            with self.subTest(proof=a):
                settled = settle_exchanges(parse_proof(a))
                self.assertEqual(print_proof(settled), b)
                self.assertEqual(print_proof(settle_exchanges(parse_proof(b))), b)
                self.assertEqual(conclusion(settled), conclusion(parse_proof(a)))

    def test_four_gates_fuses_into_single_block(self):
        p = parse_proof(load_example("four_gates.proof"))
        final = normalize(p).final
        self.assertFalse(has_cut(final))
        self.assertTrue(is_normal(final))
        before = semantics_relative(p, *negative_contexts(p)[0]).unitary
        after = semantics_relative(final, *negative_contexts(final)[0]).unitary
        self.assertTrue(approx_equal(before, after, EQUALITY_TOLERANCE))


class TestNormalizationCorpus(unittest.TestCase):
    """随机语料上的范式、终止、合流与语义不变性"""

    @classmethod
    def setUpClass(cls):
        cls.corpus = ProofGenerator(seed=7).corpus(CORPUS_SIZE)
        cls.traces = [normalize(p) for p in cls.corpus]

    def test_corpus_is_within_budget(self):
        for p in self.corpus:
            self.assertLessEqual(rule_count(p), 12)
            self.assertTrue(check(p).ok)

    def test_normal_forms_are_cut_free(self):
        for p, trace in zip(self.corpus, self.traces):
            self.assertLessEqual(len(trace.steps), step_bound(settle_exchanges(p)))
            self.assertFalse(has_cut(trace.final), print_proof(p))
            self.assertTrue(is_normal(trace.final), print_proof(p))
            self.assertEqual(conclusion(trace.final), conclusion(p))

    def test_weight_strictly_decreases(self):
        violations = [(print_proof(p), s.redex) for p, trace in zip(self.corpus, self.traces)
                      for s in trace.steps if s.weight_after >= s.weight_before]
        self.assertEqual(violations, [])
        for trace in self.traces:
            self.assertEqual(weight(trace.final), trace.steps[-1].weight_after if trace.steps else trace.initial_weight)

    def test_strategies_agree(self):
        for p, trace in zip(self.corpus[:CONFLUENCE_SIZE], self.traces):
            for seed in range(RANDOM_RUNS):
                other = normalize(p, strategy="random", seed=seed).final
                self.assertTrue(proofs_equal(other, trace.final, EQUALITY_TOLERANCE), print_proof(p))

    def test_any_redex_order_reaches_same_normal_form(self):
        for p, trace in zip(self.corpus[:ANY_REDEX_PROOFS], self.traces):
            for seed in range(ANY_REDEX_RUNS):
                other = normalize(p, strategy="random-any", seed=seed)
                self.assertTrue(other.is_monotone, print_proof(p))
                self.assertTrue(proofs_equal(other.final, trace.final, EQUALITY_TOLERANCE), print_proof(p))

    def test_all_one_step_reducts_share_normal_form(self):
        for p, trace in zip(self.corpus[:ANY_REDEX_PROOFS], self.traces):
            for reduct in one_step_reducts(settle_exchanges(p), admissible_only=False):
                final = normalize(reduct).final
                self.assertTrue(proofs_equal(final, trace.final, EQUALITY_TOLERANCE), print_proof(p))

    def test_divergent_reducts_rejoin(self):
        for p in self.corpus[:CONFLUENCE_SIZE]:
            current = settle_exchanges(p)
            reducts = one_step_reducts(current)
            for a, b in zip(reducts, reducts[1:]):
                self.assertTrue(rejoin_within(a, b, 2, EQUALITY_TOLERANCE), print_proof(p))

    def test_semantics_preserved_by_every_step(self):
        for p in self.corpus[:CONFLUENCE_SIZE]:
            entries = negative_contexts(p)
            if not entries:
                continue
            current = settle_exchanges(p)
            expected = {key: semantics_relative(current, *key) for key in map(tuple, entries)}
            while True:
                redexes = admissible_redexes(current)
                if not redexes:
                    break
                current = step(current, redexes[0])
                for (k, c), before in expected.items():
                    after = semantics_relative(current, k, c)
                    self.assertEqual(after.exit.position, before.exit.position, print_proof(p))
                    self.assertTrue(approx_equal(after.unitary, before.unitary, EQUALITY_TOLERANCE),
                                    print_proof(p))


class TestTraceText(unittest.TestCase):

    def test_trace_line_shape(self):
        trace = normalize(parse_proof(load_example("four_gates.proof")))
        pattern = re.compile(r"^\d+ [A-Za-z]+ [0-9.ε]+ \d+ -> \d+$")
        for line in trace_lines(trace):
            self.assertRegex(line, pattern)


if __name__ == "__main__":
    unittest.main()
