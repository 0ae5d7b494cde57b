import numpy as np
import pytest

from sbafnet.activation import ActivationSpec, Kind, sbaf, sbaf_derivative_flipped
from sbafnet.errors import OracleError
from sbafnet.gradcheck import (
    GradCheckRecord,
    GradCheckReport,
    check_network,
    fd_scalar,
    random_instance,
    relative_error,
)
from sbafnet.network import Network, forward, init_network

from .conftest import sbaf_spec


def random_case(shape, seed, spec=None):
    return random_instance(shape, seed, spec)


class TestFdScalar:
    def test_identity(self):
        assert fd_scalar(lambda x: x, 3.7, 0.1) == pytest.approx(1.0, abs=1e-14)

    def test_square(self):
        assert fd_scalar(lambda x: x * x, 3.0, 1e-6) == pytest.approx(6.0, abs=1e-9)

    @pytest.mark.parametrize("a,b,c,x", [(1.5, -2.0, 0.3, 0.7), (0.0, 4.0, 1.0, -2.0), (-3.0, 0.5, 2.0, 10.0)])
    def test_exact_on_quadratics(self, a, b, c, x):
        # central differences cancel the curvature term; h large to suppress round-off
        assert fd_scalar(lambda v: a * v * v + b * v + c, x, 0.5) == pytest.approx(2 * a * x + b, rel=1e-10, abs=1e-10)

    def test_sbaf(self):
        assert fd_scalar(lambda v: sbaf(v, ActivationSpec()), 0.4) == pytest.approx(-0.0919563, abs=1e-7)

    def test_errors(self):
        with pytest.raises(ValueError):
            fd_scalar(lambda v: v, 0.0, 0.0)
        with pytest.raises(OracleError):
            fd_scalar(lambda v: float("nan"), 0.0)


class TestReport:
    def test_max_and_exclusion(self):
        recs = [
            GradCheckRecord("W1[0,0]", 1.0, 1.0, 0.0),
            GradCheckRecord("W1[0,1]", 1.0, 1.1, relative_error(1.0, 1.1)),
            GradCheckRecord("b1[0]", 1.0, 5.0, 0.8, straddles_clamp=True),
        ]
        rep = GradCheckReport(recs, 1e-6)
        assert rep.max_rel_error == pytest.approx(0.1 / 1.1)
        assert rep.straddled == ["b1[0]"]

    def test_guarded_denominator(self):
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1e-12, 0.0) == pytest.approx(1e-4)

    def test_tsv(self):
        net, x, t = random_case([2, 2, 2], 0)
        tsv = check_network(net, x, t).to_tsv()
        lines = tsv.splitlines()
        assert lines[0] == "param\tanalytic\tnumeric\trel_error"
        assert len(lines) == 1 + 12
        assert all(len(l.split("\t")) == 4 for l in lines)


class TestCheckNetwork:
    @pytest.mark.parametrize("net", [
        init_network([2, 3, 2], sbaf_spec(k=0.0), seed=1),
        Network([2, 2], [np.zeros((2, 2))], [np.array([-1.0, 2.0])], ActivationSpec()),
    ], ids=["k0", "saturated"])
    def test_flat_configuration(self, net):
        rep = check_network(net, [0.3, 0.6], [0.99, 0.01])
        assert rep.max_rel_error == 0.0
        assert all(r.analytic == 0.0 and r.numeric == 0.0 for r in rep.records)

    def test_targets_equal_outputs(self):
        # at a loss minimum the central difference is left with its h**2 curvature term
        net = init_network([2, 3, 2], seed=1)
        x = np.array([0.3, 0.6])
        rep = check_network(net, x, forward(net, x).output)
        assert all(r.analytic == 0.0 for r in rep.records)
        assert max(abs(r.numeric) for r in rep.records) <= 1e-12

    @pytest.mark.parametrize("shape", [[2, 2, 2], [3, 5, 2], [4, 8, 8, 3]])
    @pytest.mark.parametrize("seed", range(5))
    def test_sbaf_networks_pass(self, shape, seed):
        assert check_network(*random_case(shape, seed)).max_rel_error <= 1e-6

    def test_parameter_count_and_ids(self):
        rep = check_network(*random_case([3, 5, 2], 0))
        assert len(rep.records) == 3 * 5 + 5 + 5 * 2 + 2
        assert rep.records[0].param == "W1[0,0]"
        assert rep.records[-1].param == "b2[1]"

    def test_flipped_sign_detected(self):
        errs = [check_network(*random_case([2, 2, 2], s), derivative_fn=sbaf_derivative_flipped).max_rel_error
                for s in range(10)]
        assert sum(e >= 1 for e in errs) >= 9

    @pytest.mark.parametrize("shape", [[3, 5, 2], [2, 6, 4, 3]])
    def test_sigmoid_calibration(self, shape):
        spec = ActivationSpec(Kind.SIGMOID)
        for seed in range(5):
            assert check_network(*random_case(shape, seed, spec)).max_rel_error <= 1e-6

    def test_straddle_flagged(self):
        # a single output neuron whose net sits h/2 inside the lower clamp edge
        spec = sbaf_spec(eps=1e-3)
        net = Network([1, 1], [np.array([[0.0]])], [np.array([1e-3 + 5e-7])], spec)
        rep = check_network(net, [0.9], [0.99], h=1e-6)
        flagged = {r.param: r.straddles_clamp for r in rep.records}
        assert flagged["b1[0]"] is True
        assert flagged["W1[0,0]"] is True  # 0.9 * h also crosses
        assert rep.max_rel_error == 0.0

    def test_saturated_unit_not_flagged(self):
        net = Network([1, 1], [np.array([[0.0]])], [np.array([-1.0])], ActivationSpec())
        rep = check_network(net, [0.5], [0.99])
        assert not rep.straddled
        assert all(r.analytic == 0.0 and r.numeric == 0.0 for r in rep.records)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            check_network(*random_case([2, 2], 0), h=0.0)
