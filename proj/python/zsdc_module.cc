// Copyright 2026 The ZSDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings for the codec, DSP, dataset, detector and experiment APIs.
// Latents cross the boundary as serialized bytes; reports as JSON text.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "zsdc/anomaly.h"
#include "zsdc/audio.h"
#include "zsdc/codec.h"
#include "zsdc/datagen.h"
#include "zsdc/error.h"
#include "zsdc/experiment.h"
#include "zsdc/latent.h"
#include "zsdc/mel.h"
#include "zsdc/resample.h"
#include "zsdc/wav.h"

namespace py = pybind11;

namespace zsdc {
namespace {

py::handle g_error_type;

py::array_t<float> SamplesArray(const AudioClip& clip) {
  py::array_t<float> out(static_cast<py::ssize_t>(clip.samples.size()));
  std::copy(clip.samples.begin(), clip.samples.end(), out.mutable_data());
  return out;
}

AudioClip MakeClip(py::array_t<float, py::array::c_style | py::array::forcecast> samples,
                   int sample_rate, std::optional<std::string> post_id,
                   std::optional<int64_t> captured_at) {
  if (samples.ndim() != 1) Fail(ErrorCode::kInvalidArgument, "samples must be one-dimensional");
  AudioClip clip;
  clip.samples.assign(samples.data(), samples.data() + samples.size());
  clip.sample_rate = sample_rate;
  clip.post_id = std::move(post_id);
  clip.captured_at = captured_at;
  clip.Validate();
  return clip;
}

py::array_t<double> MelArray(const MelFrames& mel) {
  py::array_t<double> out({mel.n_frames, mel.n_mels});
  std::copy(mel.values.begin(), mel.values.end(), out.mutable_data());
  return out;
}

std::vector<uint8_t> Bytes(const py::bytes& b) {
  const std::string s = b;
  return std::vector<uint8_t>(s.begin(), s.end());
}

py::bytes ToBytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

py::dict HeaderDict(const LatentHeader& h) {
  py::dict d;
  d["codec_version"] = h.codec_version;
  d["post_id"] = h.post_id;
  d["captured_at"] = h.captured_at;
  d["source_rate"] = h.source_rate;
  d["n_frames"] = h.n_frames;
  d["n_samples"] = h.n_samples;
  d["index_bits"] = h.index_bits;
  d["n_stages"] = h.n_stages;
  d["n_subvectors"] = h.n_subvectors;
  return d;
}

ExperimentConfig ConfigFromDict(const py::dict& overrides) {
  ExperimentConfig config;
  for (const auto& [key, value] : overrides) {
    std::string text;
    if (py::isinstance<py::bool_>(value)) {
      text = value.cast<bool>() ? "true" : "false";
    } else {
      text = py::str(value);
    }
    SetConfigValue(config, key.cast<std::string>(), text);
  }
  return config;
}

}  // namespace
}  // namespace zsdc

PYBIND11_MODULE(_zsdc, m) {
  using namespace zsdc;
  m.doc() = "Compressed road-audio collection: codec, DSP, datagen and evaluation";

  static py::exception<Error> error_type(m, "ZsdcError", PyExc_RuntimeError);
  g_error_type = error_type;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
      inst.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(g_error_type.ptr(), inst.ptr());
    }
  });

  m.attr("CANONICAL_RATE") = kCanonicalRate;
  m.attr("HALF_RATE") = kHalfRate;
  m.attr("QUARTER_RATE") = kQuarterRate;

  py::class_<AudioClip>(m, "AudioClip")
      .def(py::init(&MakeClip), py::arg("samples"), py::arg("sample_rate") = kCanonicalRate,
           py::arg("post_id") = std::nullopt, py::arg("captured_at") = std::nullopt)
      .def_property_readonly("samples", &SamplesArray)
      .def_readonly("sample_rate", &AudioClip::sample_rate)
      .def_readwrite("post_id", &AudioClip::post_id)
      .def_readwrite("captured_at", &AudioClip::captured_at)
      .def_property_readonly("duration_seconds", &AudioClip::duration_seconds)
      .def("__len__", [](const AudioClip& c) { return c.samples.size(); })
      .def("__eq__", [](const AudioClip& a, const AudioClip& b) { return a == b; })
      .def("__repr__", [](const AudioClip& c) {
        return "AudioClip(" + std::to_string(c.samples.size()) + " samples @ " +
               std::to_string(c.sample_rate) + " Hz)";
      });

  m.def("load_wav", &LoadWav, py::arg("path"));
  m.def("save_wav", &SaveWav, py::arg("clip"), py::arg("path"),
        "Writes a float-32 WAV; returns the file size in bytes.");
  m.def("wav_bytes", [](const AudioClip& c) { return ToBytes(EncodeWav(c)); }, py::arg("clip"));
  m.def("resample", &Resample, py::arg("clip"), py::arg("target_rate"));
  m.def("canonicalize", &Canonicalize, py::arg("clip"));
  m.def("mse", &Mse, py::arg("reference"), py::arg("candidate"));
  m.def("rms", &Rms, py::arg("clip"));

  m.def(
      "mel_spectrogram",
      [](const AudioClip& clip, int n_fft, int hop, int n_mels) {
        return MelArray(MelSpectrogram(clip, n_fft, hop, n_mels));
      },
      py::arg("clip"), py::arg("n_fft") = kDefaultNfft, py::arg("hop") = kDefaultHop,
      py::arg("n_mels") = kDefaultMels, "Log-mel matrix of shape (n_frames, n_mels).");
  m.def(
      "mel_energy_fraction_above",
      [](const AudioClip& clip, double cutoff_hz) {
        return MelEnergyFractionAbove(MelSpectrogram(Canonicalize(clip)), cutoff_hz);
      },
      py::arg("clip"), py::arg("cutoff_hz"));

  py::class_<CodecSpec>(m, "CodecSpec")
      .def(py::init<>())
      .def_readwrite("frame_size", &CodecSpec::frame_size)
      .def_readwrite("hop", &CodecSpec::hop)
      .def_readwrite("n_subvectors", &CodecSpec::n_subvectors)
      .def_readwrite("n_stages", &CodecSpec::n_stages)
      .def_readwrite("codebook_size", &CodecSpec::codebook_size)
      .def_readwrite("byte_budget_per_second", &CodecSpec::byte_budget_per_second);

  py::class_<Codec>(m, "Codec")
      .def_readonly("spec", &Codec::spec)
      .def_readonly("version", &Codec::version)
      .def("to_bytes", [](const Codec& c) { return ToBytes(SerializeCodec(c)); })
      .def_static("from_bytes", [](const py::bytes& b) { return DeserializeCodec(Bytes(b)); });

  m.def(
      "train_codec",
      [](const std::vector<AudioClip>& corpus, uint64_t seed, const CodecSpec& spec) {
        py::gil_scoped_release release;
        return TrainCodec(spec, corpus, seed).codec;
      },
      py::arg("corpus"), py::arg("seed"), py::arg("spec") = CodecSpec{});
  m.def("save_codec", &SaveCodec, py::arg("codec"), py::arg("path"));
  m.def("load_codec", &LoadCodec, py::arg("path"));
  m.def(
      "encode",
      [](const Codec& codec, const AudioClip& clip) {
        return ToBytes(SerializeLatent(Encode(codec, clip)));
      },
      py::arg("codec"), py::arg("clip"), "Serialized latent for the clip.");
  m.def(
      "decode",
      [](const Codec& codec, const py::bytes& latent) {
        return Decode(codec, DeserializeLatent(Bytes(latent)));
      },
      py::arg("codec"), py::arg("latent"), "44.1 kHz clip from a serialized latent.");
  m.def(
      "latent_header",
      [](const py::bytes& latent) { return HeaderDict(DeserializeLatent(Bytes(latent)).header); },
      py::arg("latent"));

  m.def(
      "auroc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        return Auroc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  py::enum_<Post>(m, "Post")
      .value("TUNNEL", Post::kTunnel)
      .value("CITY", Post::kCity)
      .value("OUTER", Post::kOuter);
  py::enum_<Condition>(m, "Condition")
      .value("DRY", Condition::kDry)
      .value("WET", Condition::kWet)
      .value("SLUSH", Condition::kSlush)
      .value("SNOW", Condition::kSnow);

  m.def(
      "synth_event",
      [](Post post, Condition condition, uint64_t seed) {
        return SynthEvent(SiteProfile::For(post), WeatherProfile::For(condition), seed).clip;
      },
      py::arg("post"), py::arg("condition"), py::arg("seed"), "One 10 s road event.");
  m.def("synth_generic_corpus", &SynthGenericCorpus, py::arg("n_clips"), py::arg("seed"),
        py::arg("seconds") = 10.0);

  m.def(
      "default_config",
      [] {
        py::dict d;
        for (const auto& [k, v] : ConfigEntries(ExperimentConfig{})) d[py::str(k)] = v;
        return d;
      },
      "Default experiment settings as strings.");
  m.def(
      "run_experiment",
      [](const py::dict& overrides) {
        const ExperimentConfig config = ConfigFromDict(overrides);
        std::string json;
        {
          py::gil_scoped_release release;
          json = ReportToJson(RunExperiment(config));
        }
        return json;
      },
      py::arg("overrides") = py::dict(),
      "Runs the experiment with the given setting overrides; returns the report as JSON.");
  m.def(
      "report_to_csv", [](const std::string& json) { return ReportToCsv(ReportFromJson(json)); },
      py::arg("report_json"));
  m.def(
      "report_to_text", [](const std::string& json) { return ReportToText(ReportFromJson(json)); },
      py::arg("report_json"));
  m.def(
      "spectrogram_pgm", [](const AudioClip& clip) { return ToBytes(RenderSpectrogramPgm(clip)); },
      py::arg("clip"), "Binary PGM of the clip's log-mel spectrogram.");
}
