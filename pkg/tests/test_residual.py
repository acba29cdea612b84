import numpy as np
import pytest

from quadbem.errors import BundleFormatError, HistoryNotReadyError
from quadbem.residual import (
    PARAMETER_TARGETS,
    HistoryBuffer,
    Layer,
    ResidualNetBundle,
    build_architecture,
    decimation_offsets,
    forward,
    history_from_dense,
    load_bundle,
    predict_residual,
    save_bundle,
)


def linear_readout_bundle(matrix: np.ndarray) -> ResidualNetBundle:
    """Bundle computing y = matrix @ flatten(history), no normalization."""
    return ResidualNetBundle(
        architecture="mlp",
        encoder=(Layer(kind="flatten"),),
        force_head=(Layer(kind="dense", weight=matrix[:3], bias=np.zeros(3)),),
        torque_head=(Layer(kind="dense", weight=matrix[3:], bias=np.zeros(3)),),
        input_mean=np.zeros(10),
        input_std=np.ones(10),
        output_std=np.ones(6),
    )


class TestHistoryBuffer:
    def test_fills_then_reports_full(self):
        buf = HistoryBuffer()
        for i in range(20):
            assert buf.full == (i >= 20)
            buf.push(np.full(10, float(i)))
        assert buf.full
        rows = buf.as_array()
        assert rows.shape == (20, 10)
        assert rows[0, 0] == 0.0 and rows[-1, 0] == 19.0

    def test_not_ready_raises(self):
        buf = HistoryBuffer()
        buf.push(np.zeros(10))
        with pytest.raises(HistoryNotReadyError):
            buf.as_array()

    def test_decimation_offsets_nearest_sample(self):
        offsets = decimation_offsets()
        # Oldest-first, ending at the current sample.
        assert offsets[-1] == 0
        assert offsets[0] == 48
        ideal = 2.5 * np.arange(20)[::-1]
        assert np.max(np.abs(offsets - ideal)) <= 0.5 + 1e-12
        strides = -np.diff(offsets)
        assert set(strides.tolist()) == {2, 3}
        # Mean spacing is within the half-sample quantization bound of 2.5 ms.
        assert abs(strides.mean() - 2.5) / 2.5 < 0.011

    def test_history_from_dense_picks_offsets(self):
        dense = np.arange(60, dtype=float)[:, None] * np.ones((1, 10))
        window = history_from_dense(dense)
        assert window.shape == (20, 10)
        assert window[-1, 0] == 59.0
        assert window[0, 0] == 59.0 - 48.0

    def test_history_from_dense_needs_enough_rows(self):
        with pytest.raises(HistoryNotReadyError):
            history_from_dense(np.zeros((30, 10)))


class TestArchitectures:
    @pytest.mark.parametrize("tag", ["tcn-small", "tcn-medium", "tcn-large", "mlp"])
    def test_parameter_counts_within_ten_percent(self, tag):
        bundle = build_architecture(tag)
        target = PARAMETER_TARGETS[tag]
        assert abs(bundle.parameter_count - target) <= 0.10 * target

    def test_same_tag_same_plan(self):
        a = build_architecture("tcn-medium")
        b = build_architecture("tcn-medium")
        assert [(l.kind, None if l.weight is None else l.weight.shape) for l in a.layers] == [
            (l.kind, None if l.weight is None else l.weight.shape) for l in b.layers
        ]

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValueError):
            build_architecture("tcn-giant")

    @pytest.mark.parametrize("tag", ["tcn-small", "tcn-medium", "tcn-large", "mlp"])
    def test_zero_weights_predict_exact_zero(self, tag):
        bundle = build_architecture(tag)
        rng = np.random.default_rng(0)
        wrench = predict_residual(bundle, rng.standard_normal((20, 10)))
        assert np.all(wrench.f == 0.0)
        assert np.all(wrench.tau == 0.0)


class TestForwardPass:
    def test_linear_readout_extracts_columns(self):
        rng = np.random.default_rng(1)
        matrix = rng.standard_normal((6, 200))
        bundle = linear_readout_bundle(matrix)
        for j in (0, 57, 199):
            history = np.zeros((20, 10))
            history[j // 10, j % 10] = 1.0
            out = forward(bundle, history)
            assert np.allclose(out, matrix[:, j], atol=1e-6)

    def test_deterministic_output(self):
        bundle = build_architecture("tcn-medium")
        rng = np.random.default_rng(2)
        # Give it non-trivial weights.
        bundle = _randomize(bundle, rng)
        history = rng.standard_normal((20, 10))
        a = forward(bundle, history)
        b = forward(bundle, history)
        assert np.array_equal(a, b)

    def test_every_history_row_reaches_output(self):
        # The buffer is the receptive field: perturbing the oldest row must
        # change the prediction for every architecture.
        rng = np.random.default_rng(3)
        for tag in ("tcn-small", "tcn-medium", "tcn-large", "mlp"):
            bundle = _randomize(build_architecture(tag), rng)
            history = rng.standard_normal((20, 10))
            base = forward(bundle, history)
            for row in (0, 7, 19):
                bumped = history.copy()
                bumped[row] += 0.5
                assert not np.allclose(forward(bundle, bumped), base), f"{tag} row {row}"

    def test_causal_conv_ignores_future(self):
        # With a single conv layer read out at mid-time, later rows must not
        # influence earlier outputs.
        rng = np.random.default_rng(4)
        layer = Layer(kind="causal-conv1d", weight=rng.standard_normal((4, 10, 3)), bias=np.zeros(4), dilation=2)
        from quadbem.residual.network import _apply_layer

        hist = rng.standard_normal((20, 10))
        out = _apply_layer(layer, hist)
        bumped = hist.copy()
        bumped[10] += 1.0
        out2 = _apply_layer(layer, bumped)
        assert np.allclose(out[:10], out2[:10])
        assert not np.allclose(out2[10], out[10])

    def test_normalization_round_trip(self):
        # Identity readout of a single feature recovers (x - mean)/std * out_std.
        matrix = np.zeros((6, 200))
        matrix[0, 190] = 1.0  # newest row, feature 0
        bundle = linear_readout_bundle(matrix)
        bundle = ResidualNetBundle(
            architecture=bundle.architecture,
            encoder=bundle.encoder,
            force_head=bundle.force_head,
            torque_head=bundle.torque_head,
            input_mean=np.full(10, 2.0),
            input_std=np.full(10, 4.0),
            output_std=np.array([3.0, 1, 1, 1, 1, 1.0]),
        )
        history = np.zeros((20, 10))
        history[19, 0] = 10.0
        out = forward(bundle, history)
        assert np.isclose(out[0], (10.0 - 2.0) / 4.0 * 3.0)

    def test_wrong_shape_raises(self):
        bundle = build_architecture("mlp")
        with pytest.raises(HistoryNotReadyError):
            forward(bundle, np.zeros((19, 10)))


class TestBundleIO:
    def test_round_trip_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(5)
        bundle = _randomize(build_architecture("tcn-small"), rng)
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_bundle(bundle, p1)
        loaded = load_bundle(p1)
        save_bundle(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_loaded_bundle_predicts_identically(self, tmp_path):
        rng = np.random.default_rng(6)
        bundle = _randomize(build_architecture("mlp"), rng)
        path = tmp_path / "m.json"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        history = rng.standard_normal((20, 10))
        assert np.array_equal(forward(bundle, history), forward(loaded, history))

    def test_declared_count_checked(self, tmp_path):
        bundle = build_architecture("tcn-small")
        path = tmp_path / "c.json"
        save_bundle(bundle, path)
        text = path.read_text().replace(f'"parameter_count":{bundle.parameter_count}', '"parameter_count":1')
        path.write_text(text)
        with pytest.raises(BundleFormatError):
            load_bundle(path)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(BundleFormatError):
            ResidualNetBundle(
                architecture="mlp",
                encoder=(Layer(kind="flatten"),),
                force_head=(Layer(kind="dense", weight=np.zeros((3, 100)), bias=np.zeros(3)),),
                torque_head=(Layer(kind="dense", weight=np.zeros((3, 200)), bias=np.zeros(3)),),
                input_mean=np.zeros(10),
                input_std=np.ones(10),
                output_std=np.ones(6),
            )


def _randomize(bundle: ResidualNetBundle, rng: np.random.Generator) -> ResidualNetBundle:
    # Weights as float32-exact values, the precision the file format stores.
    def f32(a):
        return a.astype(np.float32).astype(np.float64)

    def fill(layers):
        out = []
        for layer in layers:
            if layer.weight is None:
                out.append(layer)
            else:
                out.append(
                    Layer(
                        kind=layer.kind,
                        weight=f32(rng.standard_normal(layer.weight.shape) * 0.3),
                        bias=f32(rng.standard_normal(layer.bias.shape) * 0.1),
                        dilation=layer.dilation,
                    )
                )
        return tuple(out)

    return ResidualNetBundle(
        architecture=bundle.architecture,
        encoder=fill(bundle.encoder),
        force_head=fill(bundle.force_head),
        torque_head=fill(bundle.torque_head),
        input_mean=bundle.input_mean,
        input_std=bundle.input_std,
        output_std=bundle.output_std,
    )
