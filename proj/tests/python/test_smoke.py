# Copyright 2026 The ZSDC Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import itertools
import math

import numpy as np
import pytest

import zsdc


def sine(freq, seconds, rate, amplitude=0.5):
    t = np.arange(int(round(seconds * rate))) / rate
    return zsdc.AudioClip((amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32), rate)


@pytest.fixture(scope="module")
def small_codec():
    spec = zsdc.CodecSpec()
    spec.codebook_size = 16
    corpus = zsdc.synth_generic_corpus(2, 7, seconds=2.0)
    return zsdc.train_codec(corpus, 7, spec)


def test_clip_round_trips_through_wav(tmp_path):
    clip = sine(440.0, 0.5, 22050)
    size = zsdc.save_wav(clip, tmp_path / "a.wav")
    assert size == 44 + 4 * 11025
    loaded = zsdc.load_wav(tmp_path / "a.wav")
    assert loaded == clip
    assert loaded.sample_rate == 22050
    assert loaded.duration_seconds == pytest.approx(0.5)
    assert len(zsdc.wav_bytes(clip)) == size


def test_resample_keeps_tone_and_length():
    clip = sine(1000.0, 1.0, 44100)
    half = zsdc.resample(clip, zsdc.HALF_RATE)
    assert len(half) == 22050
    spectrum = np.abs(np.fft.rfft(half.samples))
    assert abs(np.argmax(spectrum) * 22050 / len(half) - 1000.0) <= 5.0


def test_mel_shape_and_silence_floor():
    silent = zsdc.AudioClip(np.zeros(44100, dtype=np.float32))
    mel = zsdc.mel_spectrogram(silent)
    assert mel.shape == ((44100 - 1024) // 512 + 1, 64)
    assert np.all(mel == -10.0)


def test_codec_round_trip(small_codec):
    clip = sine(500.0, 1.0, 11025)
    clip.post_id = "tunnel"
    clip.captured_at = 1700000000
    latent = zsdc.encode(small_codec, clip)
    header = zsdc.latent_header(latent)
    assert header["source_rate"] == 11025
    assert header["post_id"] == "tunnel"
    assert header["captured_at"] == 1700000000
    frames = math.ceil(44100 / 1024) + 1
    assert header["n_frames"] == frames
    # 4-bit indices: 32 subvectors x 2 stages x 4 bits + 16-bit gain per frame.
    assert len(latent) == 64 + frames * (32 * 2 * 4 + 16) // 8
    decoded = zsdc.decode(small_codec, latent)
    assert decoded.sample_rate == zsdc.CANONICAL_RATE
    assert len(decoded) == 44100
    assert zsdc.mse(clip, decoded) < zsdc.rms(clip) ** 2


def test_codec_bytes_round_trip(small_codec, tmp_path):
    again = zsdc.Codec.from_bytes(small_codec.to_bytes())
    clip = sine(300.0, 0.5, 44100)
    assert zsdc.encode(again, clip) == zsdc.encode(small_codec, clip)
    zsdc.save_codec(small_codec, tmp_path / "m.zsdm")
    assert zsdc.load_codec(tmp_path / "m.zsdm").to_bytes() == small_codec.to_bytes()


def test_errors_carry_codes(small_codec):
    with pytest.raises(zsdc.ZsdcError) as info:
        zsdc.decode(small_codec, b"nope")
    assert info.value.code in {"bad-magic", "truncated"}
    with pytest.raises(zsdc.ZsdcError) as info:
        zsdc.auroc([1.0, 2.0], [True, True])
    assert info.value.code == "undefined-auroc"


def test_auroc_matches_pair_count():
    rng = np.random.default_rng(3)
    scores = rng.integers(0, 4, size=40).astype(float).tolist()
    labels = [bool(x) for x in rng.integers(0, 2, size=40)]
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    assert zsdc.auroc(scores, labels) == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)


def test_synth_event_is_seeded():
    a = zsdc.synth_event(zsdc.Post.CITY, zsdc.Condition.WET, 5)
    b = zsdc.synth_event(zsdc.Post.CITY, zsdc.Condition.WET, 5)
    c = zsdc.synth_event(zsdc.Post.CITY, zsdc.Condition.WET, 6)
    assert len(a) == 441000
    assert a == b
    assert a != c


def test_spectrogram_pgm_header():
    pgm = zsdc.spectrogram_pgm(sine(1000.0, 1.0, 44100))
    assert pgm.startswith(b"P5\n85 64\n255\n")
    assert len(pgm) == len(b"P5\n85 64\n255\n") + 85 * 64


def test_small_experiment(small_codec, tmp_path):
    zsdc.save_codec(small_codec, tmp_path / "m.zsdm")
    report = zsdc.evaluate(scale=0.003, mse_events=1, codec_model=str(tmp_path / "m.zsdm"))
    assert [row["variant"] for row in report["size_table"]] == ["f44", "f22", "f11", "asr"]
    t = report["transmission"]
    assert t["ratio"] == pytest.approx(t["bytes_sent"] / t["raw_equivalent_bytes"])
    assert report["config"]["scale"] == "0.003"
    with pytest.raises(zsdc.ZsdcError) as info:
        zsdc.evaluate(colour=1)
    assert info.value.code == "invalid-argument"
