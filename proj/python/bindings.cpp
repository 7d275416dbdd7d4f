#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sar2rgb/cli/cli.hpp"
#include "sar2rgb/cloudscreen/cloudscreen.hpp"
#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/evalkit/evalkit.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "sar2rgb/trainer/checkpoint.hpp"
#include "sar2rgb/trainer/trainer.hpp"

namespace py = pybind11;
using namespace sar2rgb;
using rastercore::Tile;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

// [bands, H, W] copy of the tile data
Array to_numpy(const Tile& t) {
  Array a({t.bands(), t.height(), t.width()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

Tile from_numpy(const Array& a, std::vector<rastercore::BandRole> roles, rastercore::TileMeta meta) {
  if (a.ndim() == 2 && roles.size() == 1) {
    return Tile(std::move(roles), static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), std::move(meta),
                std::vector<float>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 3) throw InvalidArgument("expected a [bands, H, W] array");
  if (static_cast<std::size_t>(a.shape(0)) != roles.size()) {
    throw InvalidArgument("array has " + std::to_string(a.shape(0)) + " bands, roles name " +
                          std::to_string(roles.size()));
  }
  return Tile(std::move(roles), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)), std::move(meta),
              std::vector<float>(a.data(), a.data() + a.size()));
}

Tile rgb_tile(const Array& a) { return from_numpy(a, rastercore::rgb_roles(), {"array", "", rastercore::Sensor::S2, -1.0f}); }

py::array_t<bool> mask_array(const cloudscreen::CloudMask& m) {
  py::array_t<bool> out({m.height, m.width});
  std::copy(m.flags.begin(), m.flags.end(), out.mutable_data());
  return out;
}

std::vector<rastercore::BandRole> parse_roles(const std::vector<std::string>& names) {
  std::vector<rastercore::BandRole> roles;
  for (const auto& n : names) roles.push_back(rastercore::parse_band_role(n));
  return roles;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SAR to RGB tile translation core";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Tile>(m, "Tile")
      .def(py::init([](const Array& data, const std::vector<std::string>& roles, const std::string& tile_id,
                       const std::string& date, const std::string& sensor, float nodata) {
             return from_numpy(data, parse_roles(roles),
                               {tile_id, date, rastercore::parse_sensor(sensor), nodata});
           }),
           py::arg("data"), py::arg("roles"), py::arg("tile_id"), py::arg("date") = "", py::arg("sensor") = "S2",
           py::arg("nodata") = 0.0f)
      .def_property_readonly("data", &to_numpy)
      .def_property_readonly("roles",
                             [](const Tile& t) {
                               std::vector<std::string> out;
                               for (auto r : t.band_roles()) out.emplace_back(rastercore::to_string(r));
                               return out;
                             })
      .def_property_readonly("tile_id", [](const Tile& t) { return t.meta().tile_id; })
      .def_property_readonly("date", [](const Tile& t) { return t.meta().acquired_date; })
      .def_property_readonly("sensor", [](const Tile& t) { return std::string(rastercore::to_string(t.meta().sensor)); })
      .def_property_readonly("nodata", [](const Tile& t) { return t.meta().nodata_sentinel; })
      .def_property_readonly("shape", [](const Tile& t) { return py::make_tuple(t.bands(), t.height(), t.width()); })
      .def("__eq__", [](const Tile& a, const Tile& b) { return a == b; })
      .def("__repr__", [](const Tile& t) {
        return "<Tile " + t.meta().tile_id + " " + std::to_string(t.bands()) + "x" + std::to_string(t.height()) + "x" +
               std::to_string(t.width()) + ">";
      });

  m.def("read_tile", &rastercore::read_tile, py::arg("path"));
  m.def("write_tile", &rastercore::write_tile, py::arg("tile"), py::arg("path"));

  m.def(
      "mae", [](const Array& pred, const Array& target) { return evalkit::mae(rgb_tile(pred), rgb_tile(target)); },
      py::arg("pred"), py::arg("target"), "Mean absolute error of two [3, H, W] arrays in [0, 1].");
  m.def(
      "psnr", [](const Array& pred, const Array& target) { return evalkit::psnr(rgb_tile(pred), rgb_tile(target)); },
      py::arg("pred"), py::arg("target"), "PSNR in dB with peak 1.0, capped at 99.");

  m.def(
      "qa60_cloud_mask",
      [](const Array& qa60) {
        return mask_array(cloudscreen::decode_qa60(
            from_numpy(qa60, {rastercore::BandRole::QA60}, {"qa60", "", rastercore::Sensor::QA60, 0.0f})));
      },
      py::arg("qa60"));
  m.def(
      "heuristic_cloud_mask",
      [](const Array& rgb, float score_threshold, float brightness_threshold) {
        cloudscreen::HeuristicParams p;
        p.score_threshold = score_threshold;
        p.brightness_threshold = brightness_threshold;
        p.validate();
        return mask_array(cloudscreen::heuristic_cloud_mask(rgb_tile(rgb), p));
      },
      py::arg("rgb"), py::arg("score_threshold") = cloudscreen::HeuristicParams{}.score_threshold,
      py::arg("brightness_threshold") = cloudscreen::HeuristicParams{}.brightness_threshold);
  m.def(
      "nodata_ratio",
      [](const Array& rgb, float nodata) {
        return cloudscreen::nodata_ratio(from_numpy(rgb, rastercore::rgb_roles(), {"array", "", rastercore::Sensor::S2, nodata}));
      },
      py::arg("rgb"), py::arg("nodata") = 0.0f);
  m.def(
      "screen_tile",
      [](const Tile& rgb, const Tile* qa60) {
        const auto r = cloudscreen::screen_tile(curation::normalize_s2_reflectance(rgb), qa60);
        py::dict d;
        d["tile_id"] = r.tile_id;
        d["nodata_ratio"] = r.nodata_ratio;
        d["qa60_cloud_ratio"] = r.qa60_cloud_ratio ? py::cast(*r.qa60_cloud_ratio) : py::none();
        d["heuristic_cloud_ratio"] = r.heuristic_cloud_ratio;
        return d;
      },
      py::arg("s2"), py::arg("qa60") = nullptr, "Screens a raw S2 tile (DN) with an optional QA60 tile.");

  m.def("split_holdout_indices", &curation::holdout_indices, py::arg("count"), py::arg("n"), py::arg("seed"));

  m.def(
      "infer",
      [](const std::filesystem::path& checkpoint, const std::vector<Tile>& s1, int jobs) {
        const auto ckpt = trainer::load_checkpoint(checkpoint);
        py::gil_scoped_release release;
        return trainer::infer(ckpt, s1, jobs);
      },
      py::arg("checkpoint"), py::arg("s1_tiles"), py::arg("jobs") = 1,
      "Translates S1 tiles (dB) to reflectance RGB tiles with a saved generator.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a sar2rgb subcommand; returns (exit code, stdout, stderr).");
}
