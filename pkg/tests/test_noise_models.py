import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_qem.exceptions import DistributionError, ParameterError, StructuralError
from neumann_qem.noise_models import (
    ErrorMatrix,
    GateNoiseSpec,
    bitflip_error_matrix,
    local_channel,
    make_channel,
    noise_resistance_gate,
    noise_resistance_meas,
    random_error_matrix,
    read_error_csv,
    tensor_local_error,
    write_error_csv,
)
from neumann_qem.quantum_core import matrix_one_norm, ptm_from_kraus

from .oracles import diag_dominant_stochastic, random_stochastic

GRID = [round(0.05 * i, 2) for i in range(11)]


def _ptm(kind, p):
    return ptm_from_kraus(make_channel(GateNoiseSpec(kind, p)))


class TestCatalog:
    def test_depolarizing_ptm(self):
        np.testing.assert_allclose(_ptm("depolarizing", 0.2).entries, np.diag([1, 0.8, 0.8, 0.8]), atol=1e-15)

    def test_dephasing_ptm(self):
        np.testing.assert_allclose(_ptm("dephasing", 0.1).entries, np.diag([1, 0.8, 0.8, 1]), atol=1e-15)

    def test_damping_zero_is_identity(self):
        np.testing.assert_array_equal(_ptm("amplitude_damping", 0.0).entries, np.eye(4))

    @pytest.mark.parametrize("kind", ["depolarizing", "dephasing", "amplitude_damping"])
    def test_trace_preserving_at_extremes(self, kind):
        for p in (0.0, 1.0):
            ops = make_channel(GateNoiseSpec(kind, p)).kraus_ops
            np.testing.assert_allclose(sum(e.conj().T @ e for e in ops), np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("p", [-0.1, 1.2])
    def test_out_of_range(self, p):
        with pytest.raises(ParameterError):
            GateNoiseSpec("dephasing", p)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            GateNoiseSpec("bitflip", 0.1)

    def test_local_channel_tensor(self):
        ch = local_channel(GateNoiseSpec("depolarizing", 0.2), 2)
        ptm = ptm_from_kraus(ch).entries
        single = np.array([1, 0.8, 0.8, 0.8])
        np.testing.assert_allclose(ptm, np.diag(np.kron(single, single)), atol=1e-14)


class TestGateResistance:
    @pytest.mark.parametrize("p", GRID)
    def test_closed_forms(self, p):
        assert noise_resistance_gate(_ptm("depolarizing", p)) == pytest.approx(p, abs=1e-12)
        assert noise_resistance_gate(_ptm("dephasing", p)) == pytest.approx(2 * p, abs=1e-12)
        assert noise_resistance_gate(_ptm("amplitude_damping", p)) == pytest.approx(2 * p, abs=1e-12)

    def test_raw_array(self):
        assert noise_resistance_gate(np.diag([1, 0.5, 0.5, 1.0])) == 0.5


class TestMeasurementResistance:
    def test_identity(self):
        assert noise_resistance_meas(ErrorMatrix.identity(2)) == 0.0

    def test_symmetric_bitflip(self):
        assert noise_resistance_meas(bitflip_error_matrix(0.1)) == pytest.approx(0.2, abs=1e-15)

    def test_equals_one_norm(self, rng):
        for _ in range(100):
            d = 2 ** int(rng.integers(1, 5))
            a = random_stochastic(d, rng)
            assert noise_resistance_meas(ErrorMatrix(a)) == pytest.approx(
                matrix_one_norm(np.eye(d) - a), abs=1e-12)

    def test_rejects_non_stochastic(self):
        with pytest.raises(DistributionError):
            ErrorMatrix([[0.9, 0.2], [0.2, 0.8]])
        with pytest.raises(DistributionError):
            ErrorMatrix([[1.1, 0.0], [-0.1, 1.0]])


class TestRandomErrorMatrix:
    def test_zero_target(self):
        np.testing.assert_array_equal(random_error_matrix(3, 0.0, 1).entries, np.eye(8))

    def test_target_0657(self):
        xi = noise_resistance_meas(random_error_matrix(8, 0.657, 7))
        assert 0.647 <= xi <= 0.667

    def test_deterministic(self):
        a = random_error_matrix(4, 0.3, 11).entries
        b = random_error_matrix(4, 0.3, 11).entries
        assert a.tobytes() == b.tobytes()
        assert a.tobytes() != random_error_matrix(4, 0.3, 12).entries.tobytes()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.floats(0.0, 0.99), st.integers(0, 2 ** 31))
    def test_hits_target_and_is_stochastic(self, n, target, seed):
        a = random_error_matrix(n, target, seed)
        np.testing.assert_allclose(a.entries.sum(axis=0), 1.0, atol=1e-12)
        assert a.entries.min() >= 0
        assert abs(noise_resistance_meas(a) - target) <= 0.01

    @pytest.mark.parametrize("target", [-0.1, 1.0, 1.5])
    def test_infeasible(self, target):
        with pytest.raises(ParameterError):
            random_error_matrix(2, target, 0)


class TestTensorLocal:
    def test_identities(self):
        np.testing.assert_array_equal(tensor_local_error([ErrorMatrix.identity(1)] * 2).entries, np.eye(4))

    def test_min_diagonal(self):
        a = tensor_local_error([bitflip_error_matrix(0.1), bitflip_error_matrix(0.2)])
        assert a.entries.diagonal().min() == pytest.approx(0.72, abs=1e-15)

    def test_eight_qubits(self):
        a = tensor_local_error([bitflip_error_matrix(0.05)] * 8)
        assert noise_resistance_meas(a) == pytest.approx(2 * (1 - 0.95 ** 8), abs=1e-12)

    def test_qubit_order(self):
        a = tensor_local_error([bitflip_error_matrix(0.1), ErrorMatrix.identity(1)])
        # flipping qubit 0 (most significant) maps |00> to |10> = index 2
        assert a.entries[2, 0] == pytest.approx(0.1)
        assert a.entries[1, 0] == 0.0

    def test_size_mismatch(self):
        with pytest.raises(StructuralError):
            tensor_local_error([ErrorMatrix.identity(2)])


def test_csv_round_trip(tmp_path, rng):
    a = ErrorMatrix(diag_dominant_stochastic(4, rng))
    path = tmp_path / "a.csv"
    text = write_error_csv(a, path)
    assert text.splitlines()[0] == "dim=4"
    b = read_error_csv(path)
    assert b.entries.tobytes() == a.entries.tobytes()


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("dim=4\n1,0\n0,1\n")
    with pytest.raises(StructuralError):
        read_error_csv(path)
    path.write_text("1,0\n0,1\n")
    with pytest.raises(StructuralError):
        read_error_csv(path)


def test_csv_power_header(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("dim=2^1\n0.9,0.1\n0.1,0.9\n")
    assert read_error_csv(path).n == 1
