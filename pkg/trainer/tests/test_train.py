import logging
import time

import numpy as np
import pytest
import torch

from clctrain import (
    CoeffNet,
    ConfigError,
    NetDims,
    PipelineSettings,
    TrainConfig,
    TrainError,
    evaluate_si_sdr_gain,
    import_model,
    load_pairs,
    train,
)
from conftest import build_pair_set

TOY_DIMS = NetDims(n_bins=81, clc_order=3, hidden=32, gru_layers=2)
TOY_SETTINGS = PipelineSettings(fft_size=160, hop=40, n_bins=81, clc_order=3)


def small_config(**kw):
    defaults = dict(dims=TOY_DIMS, settings=TOY_SETTINGS, seed=0)
    defaults.update(kw)
    return TrainConfig(**defaults)


def test_config_validation():
    with pytest.raises(ConfigError, match="epochs"):
        TrainConfig(epochs=201)
    with pytest.raises(ConfigError, match="lr"):
        TrainConfig(lr=0.0)
    with pytest.raises(ConfigError, match="disagree"):
        TrainConfig(dims=NetDims(n_bins=8, clc_order=2, hidden=4, gru_layers=1))


def test_identity_pair_loss_halves(tmp_path):
    """Training on a noisy == clean pair halves the loss within 10 epochs."""
    root = build_pair_set(tmp_path / "set", pairs=1, seconds=1.0, snr_db=40, seed=3)
    # make the pair literally identical: copy clean over noisy
    clean = (root / "clean").glob("*.wav")
    for p in clean:
        (root / "noisy" / p.name).write_bytes(p.read_bytes())
    config = small_config(epochs=10, batch_size=4, identity_start=False)
    history = train(config, root, tmp_path / "ident.clcw")
    assert len(history) == 11
    assert history[10] < 0.5 * history[0]


def test_first_epoch_beats_zero_coefficients(toy_dataset, tmp_path):
    """One epoch already does better than outputting silence."""
    pairs = load_pairs(toy_dataset)
    zero_loss = float(np.mean([np.mean(p.clean**2) for p in pairs]))
    config = small_config(epochs=1)
    history = train(config, toy_dataset, tmp_path / "one.clcw")
    assert history[1] < zero_loss


def test_nan_loss_aborts_with_location(toy_dataset, tmp_path):
    model = CoeffNet(TOY_DIMS)
    with torch.no_grad():
        model.fc_in.bias[0] = float("nan")
    config = small_config(epochs=2)
    with pytest.raises(TrainError, match="epoch 1 step 1"):
        train(config, toy_dataset, tmp_path / "nan.clcw", init_model=model)


def test_per_epoch_loss_logged(toy_dataset, tmp_path, caplog):
    config = small_config(epochs=2)
    with caplog.at_level(logging.INFO, logger="clctrain.train"):
        train(config, toy_dataset, tmp_path / "log.clcw")
    messages = [r.getMessage() for r in caplog.records]
    assert any("epoch 1 loss" in m for m in messages)
    assert any("epoch 2 loss" in m for m in messages)


def test_toy_overfit_gains_five_db(toy_dataset, tmp_path):
    """20 pairs at 0 dB, 50 epochs: mean SI-SDR gain >= 5 dB within budget."""
    config = TrainConfig(epochs=50, batch_size=32, seed=0)
    out = tmp_path / "toy50.clcw"
    start = time.perf_counter()
    history = train(config, toy_dataset, out)
    elapsed = time.perf_counter() - start
    assert elapsed < 900.0
    assert history[-1] < history[0]

    model, settings = import_model(out)
    gain = evaluate_si_sdr_gain(model, toy_dataset, settings)
    assert gain >= 5.0

    # the same weights must deliver through the streaming engine as well
    clcdenoise = pytest.importorskip("clcdenoise")
    from clcdenoise.wavio import read_wav

    _, w = clcdenoise.load_weights(out)
    eng = clcdenoise.Enhancer(w)
    gains = []
    for pair in sorted((toy_dataset / "noisy").glob("*.wav")):
        noisy, _ = read_wav(pair)
        clean, _ = read_wav(toy_dataset / "clean" / pair.name)
        eng.reset()
        got = eng.process(clcdenoise.AudioChunk(noisy, 16000)).samples
        d = eng.delay_samples
        gains.append(
            clcdenoise.si_sdr(got[d:], clean[:-d]) - clcdenoise.si_sdr(noisy, clean)
        )
    assert float(np.mean(gains)) >= 5.0
