"""Lower dual points, tau/sigma/rho_flat, dual frames, prime filter
extensions, and the free-lattice oracle certifying the trace representation."""

import itertools
import random

import pytest

from gtw.algebras import ModalAlgebra, complex_algebra
from gtw.caps import DEFAULT_CAPS
from gtw.duality import (
    LDualPoint,
    check_heyting_hom,
    check_tau_naturality,
    check_theta_prime_morphism,
    dual_frame,
    eta_frame_iso,
    free_dl_oracle,
    heyting_homs,
    l_dual_points,
    oracle_points,
    pfe,
    pfe_model,
    rho_flat,
    sigma,
    tau,
)
from gtw.errors import FrameConditionError, KindError, SizeGuard
from gtw.frames import (
    frame_equal,
    frame_validates,
    make_box_frame,
    make_cin_frame,
    make_im_frame,
    make_model,
    make_si_frame,
    satisfies,
    truth_set,
)
from gtw.heyting import prime_filters, up_algebra
from gtw.order import upsets
from gtw.syntax import Signature, enumerate_formulas, letters, random_formula

from conftest import C2, POINT, V_POSET, antichain, chain

TWO = up_algebra(POINT)
THREE = up_algebra(C2)
FOURB = up_algebra(antichain(2))
FOURC = up_algebra(chain(3))
ALGS = (TWO, THREE, FOURB, FOURC)

SAMPLE_FRAMES = {
    "box": make_box_frame(V_POSET, [(0, 1), (0, 2), (1, 1), (2, 1), (2, 2)]),
    "im": make_im_frame(V_POSET, [[], [0b010], [0b100]]),
    "cin": make_cin_frame(C2, [[0b01], [0b01, 0b10]], [[0b11, 0b01], [0b01]]),
    "si": make_si_frame(V_POSET, [(0, 0), (0, 1), (1, 1), (2, 0), (2, 1)]),
}


def all_small_frames(kind, poset):
    """Every valid frame of the kind on the poset, by brute enumeration."""
    n = poset.size
    out = []
    if kind in ("box", "si"):
        make = make_box_frame if kind == "box" else make_si_frame
        for bits in range(1 << n * n):
            pairs = [(x, y) for x in range(n) for y in range(n)
                     if bits >> (x * n + y) & 1]
            try:
                out.append(make(poset, pairs))
            except FrameConditionError:
                continue
        return out
    us = upsets(poset)
    families = [fam for r in range(len(us) + 1)
                for fam in itertools.combinations(us, r)]
    for fams in itertools.product(families, repeat=n):
        try:
            out.append(make_im_frame(poset, [list(f) for f in fams]))
        except FrameConditionError:
            continue
    return out


class TestLDualPoints:
    def test_counts(self):
        assert len(l_dual_points("box", TWO).points) == 2
        assert len(l_dual_points("im", TWO).points) == 3
        assert len(l_dual_points("cin", TWO).points) == 16

    def test_box_two_frozen(self):
        sp = l_dual_points("box", TWO)
        assert [p.trace for p in sp.points] == [2, 3]
        assert sp.poset.up == (3, 2)

    def test_kind_error(self):
        with pytest.raises(KindError):
            l_dual_points("si", TWO)

    def test_size_guard(self):
        big = up_algebra(antichain(4))
        with pytest.raises(SizeGuard):
            l_dual_points("cin", big)


class TestTau:
    def test_box_top_trace_gives_everything(self):
        q = LDualPoint("box", 1 << THREE.top)
        assert tau("box", THREE, q) == 0b11

    def test_box_output_is_upset(self):
        for alg in ALGS:
            space = prime_filters(alg)
            for p in l_dual_points("box", alg).points:
                assert space.poset.is_upset(tau("box", alg, p))

    def test_im_frozen(self):
        assert prime_filters(THREE).theta == (0, 2, 3)
        assert tau("im", THREE, LDualPoint("im", 0b110)) == frozenset({2, 3})

    def test_im_family_upward_closed(self):
        for alg in (TWO, THREE, FOURB):
            space = prime_filters(alg)
            us = upsets(space.poset)
            for p in l_dual_points("im", alg).points:
                fam = tau("im", alg, p)
                for d in fam:
                    for e in us:
                        if d & ~e == 0:
                            assert e in fam

    def test_cin_frozen(self):
        w1, w2 = tau("cin", THREE, LDualPoint("cin", 0b010, 0b011))
        assert (w1, w2) == (frozenset({2}), frozenset({0}))

    def test_kind_error(self):
        with pytest.raises(KindError):
            tau("si", TWO, LDualPoint("box", 0b11))


class TestRhoFlat:
    def test_box_theta_image_gives_principal_filter(self):
        space = prime_filters(THREE)
        for a in range(THREE.size):
            assert rho_flat("box", THREE, space.theta[a]).trace == THREE.le[a]

    def test_box_full_gives_top_only(self):
        full = (1 << len(prime_filters(THREE).filters)) - 1
        assert rho_flat("box", THREE, full).trace == 1 << THREE.top

    def test_im_empty_family(self):
        assert rho_flat("im", THREE, frozenset()).trace == 0

    def test_right_inverse_of_tau(self):
        for kind in ("box", "im", "cin"):
            for alg in ALGS:
                for p in l_dual_points(kind, alg).points:
                    assert rho_flat(kind, alg, tau(kind, alg, p)) == p

    def test_right_inverse_of_sigma(self):
        for alg in ALGS:
            for p in l_dual_points("im", alg).points:
                assert rho_flat("im", alg, sigma(alg, p)) == p

    def test_cin_dia_readout_uses_second_family(self):
        # reading the dia trace against the box family instead loses identity
        q = LDualPoint("cin", 0b00, 0b00)
        w1, w2 = tau("cin", TWO, q)
        assert rho_flat("cin", TWO, (w1, w2)) == q
        space = prime_filters(TWO)
        full = (1 << len(space.filters)) - 1
        misread = sum(1 << a for a in range(TWO.size)
                      if full ^ space.theta[a] not in w1)
        assert misread == 0b11 != q.dia_trace


class TestSigmaEqualsTau:
    def test_pointwise(self):
        for alg in ALGS:
            for p in l_dual_points("im", alg).points:
                assert sigma(alg, p) == tau("im", alg, p)


class TestDualFrame:
    def test_of_complex_algebra_frozen(self, b1):
        df = dual_frame(complex_algebra(b1))
        assert df.size == 2
        assert df.base.up == (3, 2)
        assert df.rel == (2, 2)

    def test_box_identity_op(self):
        df = dual_frame(ModalAlgebra("box", TWO, unary_ops=((0, 1),)))
        assert df.size == 1 and df.rel == (1,)

    def test_im_identity_op(self):
        df = dual_frame(ModalAlgebra("im", TWO, unary_ops=((0, 1),)))
        assert df.size == 1 and df.nbhd == (frozenset({1}),)

    def test_si_excluded(self, si_c2):
        with pytest.raises(KindError):
            dual_frame(complex_algebra(si_c2))

    def test_transform_errors(self):
        alg = ModalAlgebra("box", TWO, unary_ops=((0, 1),))
        with pytest.raises(ValueError, match="sigma"):
            dual_frame(alg, transform="sigma")
        with pytest.raises(ValueError, match="transform"):
            dual_frame(alg, transform="rho")


class TestPfe:
    def test_b1_frozen(self, b1):
        pe = pfe(b1)
        assert pe.size == 2
        assert pe.rel == (2, 2)
        # the point filter of state 0 sees that of state 1 but not itself
        perm = eta_frame_iso(b1)
        assert perm == (0, 1)
        assert pe.rel[perm[0]] >> perm[1] & 1
        assert not pe.rel[perm[0]] >> perm[0] & 1

    def test_one_point_frames(self, cin_point):
        frames = [
            make_box_frame(POINT, [(0, 0)]),
            make_im_frame(POINT, [[0b1]]),
            cin_point,
            make_si_frame(POINT, [(0, 0)]),
        ]
        for f in frames:
            assert eta_frame_iso(f) == (0,)

    def test_si_frozen(self, si_c2):
        pe = pfe(si_c2)
        assert pe.rel == si_c2.rel == (2, 2)
        assert eta_frame_iso(si_c2) == (0, 1)

    def test_sigma_on_non_im_rejected(self, b1):
        with pytest.raises(ValueError, match="sigma"):
            pfe(b1, transform="sigma")


class TestEta:
    def test_sample_frames(self):
        for kind in ("box", "im", "si"):
            assert eta_frame_iso(SAMPLE_FRAMES[kind]) == (0, 1, 2)

    def test_exhaustive_small(self):
        posets = [POINT, C2, antichain(2)]
        for kind in ("box", "im", "si"):
            for poset in posets:
                for f in all_small_frames(kind, poset):
                    assert eta_frame_iso(f) is not None, (kind, poset.up, f)

    def test_cin_non_upset_member_counterexample(self):
        # {0} is not an upset of the 2-chain; the extension only carries
        # theta-image members, so this structure cannot survive the round trip
        f = make_cin_frame(C2, [[0b01], [0b01]], [[], []])
        assert eta_frame_iso(f) is None

    def test_cin_upset_members_instance(self):
        f = make_cin_frame(C2, [[], [0b10]], [[0b11], []])
        assert eta_frame_iso(f) == (0, 1)


class TestSigmaPfeCoincides:
    def test_im_frames(self):
        frames = [SAMPLE_FRAMES["im"], make_im_frame(POINT, [[0b1]])]
        frames += all_small_frames("im", C2)
        for f in frames:
            assert frame_equal(pfe(f), pfe(f, transform="sigma"))


class TestTruthLemma:
    def test_membership_and_eta_clauses(self):
        rng = random.Random(7)
        for kind, fr in SAMPLE_FRAMES.items():
            sig = Signature(kind)
            us = upsets(fr.base)
            alg = complex_algebra(fr)
            space = prime_filters(alg.base)
            etas = [space.index[sum(1 << i for i, m in enumerate(alg.base.labels)
                                    if m >> x & 1)]
                    for x in range(fr.size)]
            for _ in range(40):
                f = random_formula(rng, sig, rng.randrange(0, 4))
                names = sorted(letters(f)) or ["p"]
                val = {nm: us[rng.randrange(len(us))] for nm in names}
                m = make_model(fr, val)
                pe_ts = truth_set(pfe_model(m), f)
                # a prime filter satisfies the formula iff the original truth
                # set is one of its members
                assert pe_ts == space.theta[alg.base.labels.index(truth_set(m, f))]
                # states agree with their point filters
                for x in range(fr.size):
                    assert satisfies(m, x, f) == (pe_ts >> etas[x] & 1 == 1)

    def test_validity_transfer(self):
        for kind in ("box", "im", "si"):
            fr = SAMPLE_FRAMES[kind]
            pe = pfe(fr)
            for f in enumerate_formulas(Signature(kind), 2)[::301]:
                assert frame_validates(pe, f).valid == frame_validates(fr, f).valid

    def test_cin_validity_reflects(self):
        # holds even where the point-filter map is not an isomorphism
        fr = SAMPLE_FRAMES["cin"]
        assert eta_frame_iso(fr) is None
        pe = pfe(fr)
        for f in enumerate_formulas(Signature("cin"), 2)[::301]:
            if frame_validates(pe, f).valid:
                assert frame_validates(fr, f).valid


class TestThetaPrime:
    def test_identity_ops(self):
        assert check_theta_prime_morphism(ModalAlgebra("box", TWO, unary_ops=((0, 1),)))
        assert check_theta_prime_morphism(ModalAlgebra("im", TWO, unary_ops=((0, 1),)))

    def test_complex_algebras(self):
        for kind in ("box", "im", "cin"):
            assert check_theta_prime_morphism(complex_algebra(SAMPLE_FRAMES[kind]))


class TestNaturality:
    def test_identity(self):
        (h,) = heyting_homs(TWO, TWO)
        for kind in ("box", "im", "cin"):
            assert check_tau_naturality(kind, h, TWO, TWO)

    def test_from_two_element_algebra(self):
        for alg in ALGS:
            (h,) = heyting_homs(TWO, alg)
            for kind in ("box", "im", "cin"):
                assert check_tau_naturality(kind, h, TWO, alg)

    def test_box_im_exhaustive(self):
        for a in ALGS:
            for b in ALGS:
                for h in heyting_homs(a, b):
                    assert check_tau_naturality("box", h, a, b)
                    assert check_tau_naturality("im", h, a, b)
                    assert check_tau_naturality("im", h, a, b, transform="sigma")

    def test_cin_collapse_counterexample(self):
        # the subset functor produces every set with a matching preimage, but
        # the transform only produces theta images; a collapsing map tells
        # them apart
        (h,) = heyting_homs(THREE, TWO)
        assert h == (0, 1, 1)
        assert not check_tau_naturality("cin", h, THREE, TWO)

    def test_cin_projection_passes(self):
        for h in heyting_homs(FOURB, TWO):
            assert check_tau_naturality("cin", h, FOURB, TWO)

    def test_rejects_non_hom(self):
        with pytest.raises(ValueError, match="Heyting"):
            check_tau_naturality("box", (1, 0), TWO, TWO)

    def test_sigma_requires_im(self):
        (h,) = heyting_homs(TWO, TWO)
        with pytest.raises(ValueError, match="sigma"):
            check_tau_naturality("box", h, TWO, TWO, transform="sigma")


class TestFreeDLOracle:
    def test_lattice_sizes_frozen(self):
        cases = [("box", TWO, 3), ("box", THREE, 4), ("box", FOURC, 5),
                 ("im", TWO, 4), ("im", THREE, 5), ("im", FOURB, 8),
                 ("cin", TWO, 168)]
        for kind, alg, size in cases:
            assert free_dl_oracle(kind, alg).lattice.size == size

    def test_representation_faithful(self):
        for kind, alg in (("box", TWO), ("box", THREE), ("box", FOURB),
                          ("box", FOURC), ("im", TWO), ("im", THREE),
                          ("im", FOURB), ("cin", TWO)):
            o = oracle_points(free_dl_oracle(kind, alg))
            ld = l_dual_points(kind, alg)
            assert o.points == ld.points
            assert o.poset.up == ld.poset.up

    def test_vector_path_when_closure_overflows(self):
        o = free_dl_oracle("cin", THREE)
        assert o.lattice is None
        op = oracle_points(o)
        ld = l_dual_points("cin", THREE)
        assert op.points == ld.points and op.poset.up == ld.poset.up

    def test_size_guards(self):
        with pytest.raises(SizeGuard):
            free_dl_oracle("box", up_algebra(antichain(4)))
        with pytest.raises(SizeGuard):
            free_dl_oracle("im", up_algebra(chain(4)))
        with pytest.raises(SizeGuard):
            free_dl_oracle("cin", FOURB)

    def test_kind_error(self):
        with pytest.raises(KindError):
            free_dl_oracle("si", TWO)


class TestHeytingHoms:
    def test_counts_frozen(self):
        assert heyting_homs(TWO, THREE) == ((0, 2),)
        assert heyting_homs(THREE, TWO) == ((0, 1, 1),)
        assert len(heyting_homs(FOURB, FOURB)) == 4

    def test_check_reasons(self):
        assert check_heyting_hom((0, 2), TWO, THREE) is None
        assert check_heyting_hom((0, 0), TWO, TWO) == "top not preserved"
        assert check_heyting_hom((0, 1, 2), THREE, THREE) is None
        # collapsing the middle upward breaks implication: m -> bottom
        assert "implication" in check_heyting_hom((0, 0, 2), THREE, THREE)
