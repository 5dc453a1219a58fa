#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "tienet/ann.hpp"
#include "tienet/error.hpp"
#include "tienet/field_io.hpp"
#include "tienet/metrics.hpp"
#include "tienet/optics.hpp"
#include "tienet/pipeline.hpp"
#include "tienet/specimen.hpp"
#include "tienet/tie.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace tienet;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

template <typename T>
Field<T> to_field(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr,
                  double width) {
  if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1)) {
    throw Error(ErrorCode::ShapeMismatch, "expected a square 2-D array");
  }
  const auto m = static_cast<std::size_t>(arr.shape(0));
  std::vector<T> data(arr.data(), arr.data() + m * m);
  return Field<T>(m, width, std::move(data));
}

template <typename T>
py::array_t<T> to_array(const Field<T>& f) {
  const auto m = static_cast<py::ssize_t>(f.size());
  py::array_t<T> out({m, m});
  std::memcpy(out.mutable_data(), f.storage().data(), f.count() * sizeof(T));
  return out;
}

py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json from_python(const py::object& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ExperimentConfig config_from(const py::object& obj) {
  ExperimentConfig cfg;
  if (!obj.is_none()) update_from_json(cfg, from_python(obj));
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_tienet, m) {
  m.doc() = "TIE phase retrieval simulation and neural-network phase adjustment";

  // Leaked on purpose: the class must outlive every translator call.
  static PyObject* error_type =
      PyErr_NewException("tienet.TienetError", PyExc_RuntimeError, nullptr);
  m.attr("TienetError") = py::handle(error_type).inc_ref();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("electron_wavelength", &electron_wavelength, py::arg("voltage"),
        "Relativistic electron wavelength in nm.");
  m.def("interaction_constant", &interaction_constant, py::arg("voltage"),
        "Interaction constant sigma in rad / (V nm).");

  m.def(
      "spectral_forward",
      [](const ComplexArray& f) { return to_array(spectral_forward(to_field(f, 1.0))); },
      py::arg("field"), "Unitary 2-D DFT.");
  m.def(
      "spectral_inverse",
      [](const ComplexArray& f) { return to_array(spectral_inverse(to_field(f, 1.0))); },
      py::arg("spectrum"));

  m.def(
      "propagate",
      [](const ComplexArray& psi, double width, double distance, double wavelength) {
        return to_array(propagate(to_field(psi, width), distance, wavelength));
      },
      py::arg("psi"), py::arg("width"), py::arg("distance"), py::arg("wavelength"),
      "Fresnel propagation over `distance` nm.");

  m.def(
      "defocus_series",
      [](const ComplexArray& psi, double width, double defocus, double wavelength) {
        const DefocusSeries s = defocus_series(to_field(psi, width), defocus, wavelength);
        return py::make_tuple(to_array(s.under), to_array(s.in_focus), to_array(s.over));
      },
      py::arg("psi"), py::arg("width"), py::arg("defocus"), py::arg("wavelength"),
      "Returns (under, in_focus, over) intensities.");

  m.def(
      "add_shot_noise",
      [](const RealArray& image, double level, double incident, std::uint64_t seed) {
        return to_array(add_shot_noise(to_field(image, 1.0), level, incident, seed));
      },
      py::arg("image"), py::arg("level"), py::arg("incident") = 1.0, py::arg("seed") = 0);

  m.def(
      "retrieve_phase",
      [](const RealArray& under, const RealArray& in_focus, const RealArray& over, double width,
         double defocus, double kv, double incident, const std::string& apodize) {
        const ScalarField i0 = to_field(in_focus, width);
        ExperimentConfig parsed;
        update_from_json(parsed, json{{"apodize", apodize}});
        TieConfig cfg = TieConfig::standard(incident, width, i0.size());
        cfg.apodize = parsed.apodize;
        const OpticsConfig optics = OpticsConfig::make(kv * 1e3, defocus, 0.0, {-17.0, 1.0}, incident);
        return to_array(retrieve_phase(to_field(under, width), i0, to_field(over, width), optics, cfg));
      },
      py::arg("under"), py::arg("in_focus"), py::arg("over"), py::arg("width"), py::arg("defocus"),
      py::arg("kv") = 300.0, py::arg("incident") = 1.0, py::arg("apodize") = "derivative",
      "Regularised TIE phase retrieval from a defocus series.");

  m.def(
      "sample_spec",
      [](std::uint64_t seed, double width) {
        SpecimenRanges r;
        r.width = width;
        return to_python(spec_to_json(sample_spec(seed, r)));
      },
      py::arg("seed"), py::arg("width") = 150.0, "Random specimen description as a dict.");
  m.def(
      "thickness_map",
      [](const py::object& spec, std::size_t m, double width, std::size_t zslices) {
        return to_array(thickness_map(spec_from_json(from_python(spec)), m, width, zslices));
      },
      py::arg("spec"), py::arg("m"), py::arg("width") = 150.0,
      py::arg("zslices") = kDefaultZSlices);

  m.def(
      "simulate_pair",
      [](std::uint64_t seed, const py::object& config) {
        const SimulatedPair p = simulate_pair(seed, config_from(config));
        py::dict out;
        out["spec"] = to_python(spec_to_json(p.spec));
        out["exact"] = to_array(p.exact);
        out["retrieved"] = to_array(p.retrieved);
        out["under"] = to_array(p.series.under);
        out["in_focus"] = to_array(p.series.in_focus);
        out["over"] = to_array(p.series.over);
        return out;
      },
      py::arg("seed"), py::arg("config") = py::none(),
      "Simulates one exact/retrieved phase pair; `config` is a partial config dict.");

  m.def(
      "rms_error",
      [](const RealArray& exact, const RealArray& candidate, double radius, bool root) {
        const ScalarField ex = to_field(exact, 1.0);
        return rms_error(ex, to_field(candidate, 1.0), disk_mask(ex.size(), radius),
                         root ? ErrorNormalization::Root : ErrorNormalization::SumOfSquares);
      },
      py::arg("exact"), py::arg("candidate"), py::arg("radius") = 0.5, py::arg("root") = false,
      "Normalised squared phase error over the centred disk.");
  m.def(
      "offset_correct",
      [](const RealArray& retrieved, const RealArray& exact, double radius) {
        const ScalarField ex = to_field(exact, 1.0);
        return to_array(offset_correct(to_field(retrieved, 1.0), ex, disk_mask(ex.size(), radius)));
      },
      py::arg("retrieved"), py::arg("exact"), py::arg("radius") = 0.5);

  m.def(
      "read_field",
      [](const std::filesystem::path& path) -> py::tuple {
        const AnyField f = read_field(path);
        if (const auto* s = std::get_if<ScalarField>(&f)) return py::make_tuple(to_array(*s), s->width());
        const auto& c = std::get<ComplexField>(f);
        return py::make_tuple(to_array(c), c.width());
      },
      py::arg("path"), "Reads a PHF1 file; returns (array, width).");
  m.def(
      "write_field",
      [](const std::filesystem::path& path, const py::array& arr, double width) {
        if (py::isinstance<py::array_t<Complex>>(arr)) {
          write_field(path, to_field(arr.cast<ComplexArray>(), width));
        } else {
          write_field(path, to_field(arr.cast<RealArray>(), width));
        }
      },
      py::arg("path"), py::arg("array"), py::arg("width"));

  m.def(
      "default_config", [](const std::string& preset) { return to_python(json(ExperimentConfig::preset(preset))); },
      py::arg("preset") = "desk32");
  m.def(
      "generate_dataset",
      [](const py::object& config, const std::filesystem::path& out) {
        const ExperimentConfig cfg = config_from(config);
        py::gil_scoped_release release;
        generate_dataset(cfg, out);
      },
      py::arg("config"), py::arg("out"), "Writes manifest.json and PHF1 fields under `out`.");
  m.def(
      "train",
      [](const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
         const py::object& overrides) {
        const DatasetManifest manifest = load_manifest(dataset);
        ExperimentConfig cfg;
        update_from_json(cfg, manifest.config);
        if (!overrides.is_none()) update_from_json(cfg, from_python(overrides));
        std::vector<double> history;
        {
          py::gil_scoped_release release;
          history = run_training(manifest, dataset, cfg, checkpoint).loss_history;
        }
        return history;
      },
      py::arg("dataset"), py::arg("checkpoint"), py::arg("overrides") = py::none(),
      "Trains on the dataset's training split; returns the per-epoch mean loss.");
  m.def(
      "evaluate",
      [](const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
         bool offset, bool mask_inputs) {
        const DatasetManifest manifest = load_manifest(dataset);
        const Network net = load_network(checkpoint);
        EvaluationOptions opts;
        opts.inputs = {offset, mask_inputs};
        ErrorReport report;
        {
          py::gil_scoped_release release;
          report = run_evaluation(manifest, dataset, net, opts);
        }
        return to_python(report_to_json(report, manifest.config));
      },
      py::arg("dataset"), py::arg("checkpoint"), py::arg("offset_correct") = false,
      py::arg("mask_inputs") = false, "Scores the test split; returns the report dict.");
  m.def(
      "adjust",
      [](const std::filesystem::path& checkpoint, const RealArray& retrieved) {
        return to_array(adjust(load_network(checkpoint), to_field(retrieved, 1.0)));
      },
      py::arg("checkpoint"), py::arg("retrieved"), "Applies a trained network to a retrieved phase.");
  m.def(
      "render",
      [](const std::filesystem::path& in, const std::filesystem::path& out, double lo, double hi) {
        render(in, out, lo, hi);
      },
      py::arg("field"), py::arg("out"), py::arg("min") = -3.0, py::arg("max") = 3.0);
}
