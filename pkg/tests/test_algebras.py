"""Complex algebras, equational validation, H/S/P primitives, evaluation."""

import pytest

from gtw.algebras import (
    AlgebraValidityResult,
    ModalAlgebra,
    algebra_eval,
    algebra_validates,
    algebra_validates_axiom,
    check_modal_homomorphism,
    complex_algebra,
    enumerate_modal_homs,
    is_homomorphic_image,
    is_modal_homomorphism,
    product,
    subalgebra_masks,
    subalgebras,
)
from gtw.caps import DEFAULT_CAPS
from gtw.errors import FrameConditionError, KindMismatch, MissingLetterError, SizeGuard
from gtw.frames import (
    Frame,
    frame_validates,
    frame_validates_axiom,
    make_box_frame,
    make_cin_frame,
    make_im_frame,
    make_model,
    truth_set,
    validate_frame,
)
from gtw.heyting import up_algebra
from gtw.order import enumerate_posets, upsets
from gtw.syntax import (
    Signature,
    enumerate_formulas,
    letters,
    parse,
    parse_axiom_pair,
)

from conftest import C2, POINT, antichain, chain

BOX = Signature("box")
IM = Signature("im")
CIN = Signature("cin")
SI = Signature("si")

TWO = up_algebra(POINT)


def two_with_box(table=(0, 1)):
    return ModalAlgebra("box", TWO, unary_ops=(table,))


from gtw.algebras import validate_modal_algebra


class TestComplexAlgebra:
    def test_b1_box_table_frozen(self, b1):
        alg = complex_algebra(b1)
        assert alg.base.labels == (0, 0b10, 0b11)
        assert alg.unary_ops[0] == (0, 2, 2)

    def test_one_point_im(self):
        f = make_im_frame(POINT, [[0b1]])
        alg = complex_algebra(f)
        assert alg.unary_ops[0] == (0, 1)

    def test_cin_tables_no_equations(self, cin_point):
        alg = complex_algebra(cin_point)
        # empty families: box sends everything to bottom, dia to top
        assert alg.unary_ops[0] == (0, 0)
        assert alg.unary_ops[1] == (1, 1)

    def test_si_table_frozen(self, si_c2):
        alg = complex_algebra(si_c2)
        assert alg.binary_op == ((2, 2, 2), (0, 2, 2), (0, 2, 2))

    def test_hao_equations_hold_for_all_small_box_frames(self):
        for p in enumerate_posets(2, caps=DEFAULT_CAPS):
            for bits in range(1 << 4):
                rel = tuple((bits >> (2 * x)) & 0b11 for x in range(2))
                try:
                    frame = validate_frame(Frame("box", p, rel=rel))
                except FrameConditionError:
                    continue
                complex_algebra(frame)  # validation runs on construction


class TestValidation:
    def test_box_requires_top_and_meet(self):
        three = up_algebra(C2)
        with pytest.raises(ValueError, match="meet preservation"):
            validate_modal_algebra(ModalAlgebra("box", three, unary_ops=((2, 0, 2),)))
        with pytest.raises(ValueError, match="top"):
            validate_modal_algebra(ModalAlgebra("box", three, unary_ops=((0, 0, 0),)))

    def test_constant_top_box_is_legal(self):
        validate_modal_algebra(two_with_box((1, 1)))

    def test_im_requires_monotone(self):
        three = up_algebra(C2)
        with pytest.raises(ValueError, match="monotone"):
            validate_modal_algebra(ModalAlgebra("im", three, unary_ops=((1, 0, 2),)))
        validate_modal_algebra(ModalAlgebra("im", three, unary_ops=((1, 1, 2),)))

    def test_cin_tables_unconstrained(self):
        three = up_algebra(C2)
        validate_modal_algebra(
            ModalAlgebra("cin", three, unary_ops=((2, 0, 1), (1, 1, 0))))

    def test_arity_enforced(self):
        with pytest.raises(ValueError, match="unary"):
            validate_modal_algebra(ModalAlgebra("cin", TWO, unary_ops=((0, 1),)))
        with pytest.raises(ValueError, match="binary"):
            validate_modal_algebra(ModalAlgebra("si", TWO))


class TestEvaluation:
    def test_top_always_top(self, b1):
        alg = complex_algebra(b1)
        assert algebra_eval(alg, parse("T", BOX), {}) == alg.base.top

    def test_matches_truth_set_pointwise(self, b1, im_c2, si_c2, cin_point):
        # the complex algebra evaluates a formula to the index of its truth set
        for frame, sig in ((b1, BOX), (im_c2, IM), (si_c2, SI), (cin_point, CIN)):
            alg = complex_algebra(frame)
            index = {m: i for i, m in enumerate(alg.base.labels)}
            us = upsets(frame.base, caps=DEFAULT_CAPS)
            corpus = enumerate_formulas(sig, 2)[::97]
            for f in corpus:
                names = sorted(letters(f))
                val = {name: us[(i + 1) % len(us)] for i, name in enumerate(names)}
                asg = {name: index[m] for name, m in val.items()}
                ts = truth_set(make_model(frame, val), f)
                assert algebra_eval(alg, f, asg) == index[ts], f

    def test_missing_letter(self):
        with pytest.raises(MissingLetterError):
            algebra_eval(two_with_box(), parse("p", BOX), {})

    def test_validates_with_witness(self, b1):
        alg = complex_algebra(b1)
        res = algebra_validates(alg, parse("box p", BOX))
        assert not res.valid
        assert res.assignment == (("p", 0),)

    def test_validates_axiom(self, b1):
        alg = complex_algebra(b1)
        ax = parse_axiom_pair("box p & box q <-> box (p & q)", BOX)
        assert algebra_validates_axiom(alg, ax).valid


class TestFrameAlgebraBridge:
    def test_frame_validity_iff_algebra_validity(self, b1, im_c2, si_c2, cin_point):
        for frame, sig in ((b1, BOX), (im_c2, IM), (si_c2, SI), (cin_point, CIN)):
            alg = complex_algebra(frame)
            for f in enumerate_formulas(sig, 2)[::57]:
                assert frame_validates(frame, f).valid == algebra_validates(alg, f).valid, f


class TestHomomorphisms:
    def test_identity(self):
        a = two_with_box()
        assert is_modal_homomorphism((0, 1), a, a)

    def test_broken_modal_table(self):
        a = two_with_box((0, 1))
        b = two_with_box((1, 1))
        reason = check_modal_homomorphism((0, 1), a, b)
        assert reason is not None and "modal table" in reason

    def test_broken_lattice_map(self):
        a = two_with_box()
        assert check_modal_homomorphism((1, 0), a, a) == "top not preserved"

    def test_kind_mismatch(self):
        a = two_with_box()
        b = ModalAlgebra("im", TWO, unary_ops=((0, 1),))
        with pytest.raises(KindMismatch):
            check_modal_homomorphism((0, 1), a, b)

    def test_enumerate_finds_diagonal(self):
        a = two_with_box()
        p = product(a, a)
        homs = enumerate_modal_homs(a, p)
        assert homs == ((0, 3),)

    def test_search_respects_cap(self):
        a = complex_algebra(make_box_frame(antichain(2), []))
        with pytest.raises(SizeGuard):
            enumerate_modal_homs(a, a, caps=DEFAULT_CAPS.with_overrides(max_map_search=10))


class TestHSP:
    def test_subalgebras_of_two(self):
        assert [s.size for s in subalgebras(two_with_box())] == [2]

    def test_subalgebras_of_boolean_square(self):
        p = product(two_with_box(), two_with_box())
        masks = subalgebra_masks(p)
        assert masks == (0b1001, 0b1111)
        subs = subalgebras(p)
        assert [s.size for s in subs] == [2, 4]
        assert subs[0].base.labels == (0, 3)

    def test_subalgebra_scan_cap(self, b1):
        big = complex_algebra(make_box_frame(antichain(4), []))
        with pytest.raises(SizeGuard):
            subalgebra_masks(big)

    def test_product_is_componentwise(self):
        a = two_with_box()
        p = product(a, a)
        assert p.size == 4
        assert p.unary_ops[0] == (0, 1, 2, 3)
        assert p.base.meet[1][2] == 0 and p.base.join[1][2] == 3

    def test_projection_is_image(self):
        a = two_with_box()
        p = product(a, a)
        h = is_homomorphic_image(p, a)
        assert h == (0, 0, 1, 1)
        assert is_homomorphic_image(a, p) is None

    def test_identity_is_image(self):
        a = two_with_box()
        assert is_homomorphic_image(a, a) == (0, 1)

    def test_product_kind_mismatch(self):
        with pytest.raises(KindMismatch):
            product(two_with_box(), ModalAlgebra("im", TWO, unary_ops=((0, 1),)))

    def test_hsp_preserve_validity(self, b1):
        # subalgebras, products and homomorphic images keep valid formulas valid
        alg = complex_algebra(b1)
        other = complex_algebra(make_box_frame(C2, []))
        pool = [alg, other, product(alg, other)]
        formulas = [parse(t, BOX) for t in
                    ("box T", "box p -> box (p | q)", "box p & box q -> box (p & q)",
                     "p -> (q -> p)", "box (p & q) -> box p")]
        for f in formulas:
            for a in pool:
                if not algebra_validates(a, f).valid:
                    continue
                if a.size <= DEFAULT_CAPS.max_subalgebra:
                    for s in subalgebras(a):
                        assert algebra_validates(s, f).valid
                for b in pool:
                    if b.size ** a.size > DEFAULT_CAPS.max_map_search:
                        continue
                    if is_homomorphic_image(a, b):
                        assert algebra_validates(b, f).valid
            if all(algebra_validates(a, f).valid for a in pool[:2]):
                assert algebra_validates(pool[2], f).valid
