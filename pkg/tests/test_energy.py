import numpy as np
import pytest

from spikenose import energy, snn, synthetic, training
from spikenose.model import Model


class TestConstants:
    def test_mac_is_multiply_plus_add(self):
        c = energy.EnergyConstants()
        assert c.e_mac == pytest.approx(c.e_multiply + c.e_add, abs=1e-12)
        with pytest.raises(ValueError):
            energy.EnergyConstants(e_multiply=1.0, e_add=1.0, e_mac=3.0)


class TestFlops:
    def test_conv_formula_small(self):
        assert energy.flops_conv(4, 4, 3, 1, 8) == 16 * 9 * 8

    def test_dense_formula(self):
        assert energy.flops_dense(1024, 30) == 30720

    def test_default_conv_layer_matches_loop_count(self):
        config = snn.NetworkConfig()
        got = energy.network_flops(config)["conv"]
        assert got == 8 * 16 * 9 * 8 == 9216
        # brute-force count of multiply-accumulates in the naive loop
        macs = 0
        k, pad = 3, 1
        for _ in range(config.conv_channels):
            for r in range(8):
                for c in range(16):
                    macs += k * k  # one MAC per kernel tap per output cell
        assert macs == got

    def test_flops_snn_endpoints(self):
        assert energy.flops_snn(482304, 0.0) == 0.0
        assert energy.flops_snn(482304, 1.0) == 482304
        assert energy.flops_snn(482304, 0.23) == pytest.approx(110929.92)

    def test_activity_out_of_range(self):
        with pytest.raises(ValueError):
            energy.flops_snn(100, 1.5)

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            energy.flops_conv(0, 4, 3, 1, 8)
        with pytest.raises(ValueError):
            energy.flops_dense(10, 0)


class TestEnergyReport:
    def test_golden_reproduction(self):
        p = energy.golden_profile()
        assert p.e_ann_nj == pytest.approx(1543.4, abs=0.05)
        assert p.e_snn_nj == pytest.approx(626.3, abs=0.05)
        assert p.efficiency_ratio == pytest.approx(2.46, abs=0.01)

    def test_single_dense_layer_hand_arithmetic(self):
        p = energy.energy_report([100], [0.5], time_steps=1)
        assert p.e_ann_nj == pytest.approx(100 * 3.2 / 1000)
        assert p.e_snn_nj == pytest.approx(50 * 0.1 / 1000)
        assert p.efficiency_ratio == pytest.approx(64.0)

    def test_linear_in_time_steps_and_activity(self):
        base = energy.energy_report([1000, 2000], [0.2, 0.4], time_steps=10)
        double_t = energy.energy_report([1000, 2000], [0.2, 0.4], time_steps=20)
        double_a = energy.energy_report([1000, 2000], [0.4, 0.8], time_steps=10)
        assert double_t.e_snn_nj == pytest.approx(2 * base.e_snn_nj)
        assert double_a.e_snn_nj == pytest.approx(2 * base.e_snn_nj)
        assert double_t.e_ann_nj == base.e_ann_nj

    def test_ratio_consistent_with_totals(self):
        p = energy.energy_report([1000], [0.3], time_steps=7)
        assert p.efficiency_ratio == pytest.approx(p.e_ann_nj / p.e_snn_nj, rel=1e-9)

    def test_empty_network_rejected(self):
        with pytest.raises(ValueError):
            energy.energy_report([], [], time_steps=10)

    def test_csv_contains_totals_and_mode(self):
        csv = energy.energy_csv(energy.golden_profile())
        assert csv.startswith("layer,flops_ann,s_a,flops_snn\n")
        assert "e_ann_nJ,1543.37" in csv
        assert "e_snn_nJ,626.27" in csv
        assert "efficiency_ratio,2.46" in csv
        assert "mode,golden" in csv


class TestMeasureActivity:
    def make_model(self, tiny_network, samples):
        model = Model.initialize(tiny_network, seed=0)
        model.stats = training.fit_stats(samples)
        import numpy as _np
        model.stats = type(model.stats)(
            log_min=model.stats.log_min.astype(_np.float32),
            log_max=model.stats.log_max.astype(_np.float32),
        )
        return model

    def test_zero_weight_network_is_silent(self, tiny_network):
        samples = synthetic.generate_batches(seed=2, census={1: (4, 4, 0, 0, 0, 0)})[1]
        model = self.make_model(tiny_network, samples)
        for k in model.weights:
            model.weights[k][:] = 0.0
        model.posterior_w.mu[:] = 0.0
        model.posterior_b.mu[:] = 0.0
        activity = energy.measure_activity(model, samples, time_steps=6, seed=0)
        assert all(a == 0.0 for a in activity.values())

    def test_activity_in_unit_interval_and_deterministic(self, tiny_network):
        samples = synthetic.generate_batches(seed=2, census={1: (4, 4, 0, 0, 0, 0)})[1]
        model = self.make_model(tiny_network, samples)
        a = energy.measure_activity(model, samples, time_steps=6, seed=3)
        b = energy.measure_activity(model, samples, time_steps=6, seed=3)
        assert a == b
        assert all(0.0 <= v <= 1.0 for v in a.values())

    def test_alternating_single_neuron_activity_is_half(self):
        # one LIF neuron driven to fire on alternate steps: constant current
        # 0.6, gamma 0.9, v_thr 1.0 -> V: 0.6, 1.14*, 0.63, 1.16*, ...
        params = snn.LifParams(gamma=0.9, v_thr=1.0)
        v = np.array(0.0)
        s = np.array(0.0)
        fired = []
        for _ in range(200):
            v, s = snn.lif_step(v, np.array(0.6), s, params)
            fired.append(float(s))
        assert np.mean(fired[2:]) == pytest.approx(0.5, abs=0.01)

    def test_empty_sample_set_rejected(self, tiny_network):
        model = Model.initialize(tiny_network, seed=0)
        with pytest.raises(ValueError):
            energy.measure_activity(model, [], time_steps=5, seed=0)
