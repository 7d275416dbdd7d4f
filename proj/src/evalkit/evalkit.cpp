#include "sar2rgb/evalkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"

namespace sar2rgb::evalkit {

namespace fs = std::filesystem;

namespace {

constexpr float kSlack = 1e-6f;

void check_pair(const Tile& pred, const Tile& target) {
  for (const Tile* t : {&pred, &target}) {
    if (!t->has_roles(rastercore::rgb_roles())) throw InvalidArgument("metrics expect RGB tiles");
    for (float v : t->data()) {
      if (v < -kSlack || v > 1.0f + kSlack) {
        throw InvalidArgument("tile '" + t->meta().tile_id + "' has value " + std::to_string(v) + " outside [0, 1]");
      }
    }
  }
  if (pred.height() != target.height() || pred.width() != target.width()) {
    throw InvalidArgument("shape mismatch: " + std::to_string(pred.height()) + "x" + std::to_string(pred.width()) +
                          " vs " + std::to_string(target.height()) + "x" + std::to_string(target.width()));
  }
}

double mse(const Tile& pred, const Tile& target) {
  const auto p = pred.data(), t = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    s += d * d;
  }
  return s / static_cast<double>(p.size());
}

double psnr_from_mse(double m) { return m < kPsnrCapMse ? kPsnrCapDb : 10.0 * std::log10(1.0 / m); }

std::map<std::string, const Tile*> index_by_id(const PredictionSet& set, const char* what) {
  std::map<std::string, const Tile*> out;
  for (const auto& p : set) {
    if (!out.emplace(p.pair_id, &p.tile).second) {
      throw InvalidArgument(std::string("duplicate pair_id '") + p.pair_id + "' in " + what);
    }
  }
  return out;
}

}  // namespace

double mae(const Tile& pred, const Tile& target) {
  check_pair(pred, target);
  const auto p = pred.data(), t = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(static_cast<double>(p[i]) - static_cast<double>(t[i]));
  return s / static_cast<double>(p.size());
}

double psnr(const Tile& pred, const Tile& target) {
  check_pair(pred, target);
  return psnr_from_mse(mse(pred, target));
}

MetricsReport evaluate(const PredictionSet& preds, const PredictionSet& refs) {
  const auto pred_ix = index_by_id(preds, "predictions");
  const auto ref_ix = index_by_id(refs, "references");
  for (const auto& [id, _] : pred_ix) {
    if (!ref_ix.contains(id)) throw InvalidArgument("prediction '" + id + "' has no reference");
  }
  for (const auto& [id, _] : ref_ix) {
    if (!pred_ix.contains(id)) throw InvalidArgument("reference '" + id + "' has no prediction");
  }
  MetricsReport report;
  report.n_images = pred_ix.size();
  double mae_sum = 0.0, psnr_sum = 0.0;
  for (const auto& [id, p] : pred_ix) {
    const Tile& r = *ref_ix.at(id);
    ImageMetrics m{id, mae(*p, r), psnr(*p, r)};
    mae_sum += m.mae;
    psnr_sum += m.psnr_db;
    report.per_image.push_back(std::move(m));
  }
  if (report.n_images > 0) {
    report.mae_mean = mae_sum / static_cast<double>(report.n_images);
    report.psnr_mean_db = psnr_sum / static_cast<double>(report.n_images);
  }
  return report;
}

PredictionSet ensemble(const std::map<std::string, PredictionSet>& outputs, const EnsembleSpec& spec) {
  if (spec.members.empty()) throw InvalidArgument("ensemble needs at least one member");
  std::vector<std::map<std::string, const Tile*>> member_ix;
  for (const auto& name : spec.members) {
    const auto it = outputs.find(name);
    if (it == outputs.end()) throw InvalidArgument("no outputs for ensemble member '" + name + "'");
    member_ix.push_back(index_by_id(it->second, name.c_str()));
  }
  const auto& ids = member_ix.front();
  for (std::size_t m = 1; m < member_ix.size(); ++m) {
    bool same = member_ix[m].size() == ids.size();
    for (const auto& [id, _] : ids) same = same && member_ix[m].contains(id);
    if (!same) throw InvalidArgument("ensemble members '" + spec.members[0] + "' and '" + spec.members[m] +
                                     "' cover different pair_id sets");
  }

  PredictionSet out;
  if (spec.mode == EnsembleMode::Assign) {
    for (const auto& [id, _] : ids) {
      const auto a = spec.assignment.find(id);
      if (a == spec.assignment.end()) throw InvalidArgument("assignment does not cover pair '" + id + "'");
      const auto pos = std::find(spec.members.begin(), spec.members.end(), a->second);
      if (pos == spec.members.end()) {
        throw InvalidArgument("pair '" + id + "' is assigned to unknown member '" + a->second + "'");
      }
      out.push_back({id, *member_ix[static_cast<std::size_t>(pos - spec.members.begin())].at(id)});
    }
    return out;
  }

  const std::size_t k = member_ix.size();
  std::vector<float> values(k);
  for (const auto& [id, first] : ids) {
    for (std::size_t m = 1; m < k; ++m) {
      const Tile* t = member_ix[m].at(id);
      if (!t->has_roles(first->band_roles()) || t->height() != first->height() || t->width() != first->width()) {
        throw InvalidArgument("ensemble members disagree on the shape of pair '" + id + "'");
      }
    }
    std::vector<float> data(first->data().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t m = 0; m < k; ++m) values[m] = member_ix[m].at(id)->data()[i];
      std::sort(values.begin(), values.end());
      double s = 0.0;
      for (float v : values) s += v;
      data[i] = std::clamp(static_cast<float>(s / static_cast<double>(k)), 0.0f, 1.0f);
    }
    out.push_back({id, Tile(first->band_roles(), first->height(), first->width(), first->meta(), std::move(data))});
  }
  return out;
}

SubmissionSummary package_submission(const PredictionSet& preds, const fs::path& out_dir) {
  std::map<std::string, const Tile*> sorted = index_by_id(preds, "submission");
  for (const auto& [id, tile] : sorted) {
    rastercore::validate_tile_id(id);
    if (!tile->has_roles(rastercore::rgb_roles())) throw InvalidArgument("submission tile '" + id + "' is not RGB");
    for (float v : tile->data()) {
      if (v < -kSlack || v > 1.0f + kSlack) throw InvalidArgument("submission tile '" + id + "' leaves [0, 1]");
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw IoError("cannot create submission directory '" + out_dir.string() + "'");

  SubmissionSummary summary;
  std::string manifest;
  for (const auto& [id, tile] : sorted) {
    const auto bytes = rastercore::encode_tile(*tile);
    const std::string file = id + ".s2tl";
    detail::write_file(out_dir / file, bytes);
    summary.crc32 = detail::crc32(bytes.data(), bytes.size(), summary.crc32);
    ++summary.count;
    char crc_hex[9];
    std::snprintf(crc_hex, sizeof crc_hex, "%08x", detail::crc32(bytes.data(), bytes.size()));
    manifest += nlohmann::json{{"pair_id", id}, {"file", file}, {"crc32", crc_hex}}.dump() + "\n";
  }
  detail::write_text(out_dir / "submission.jsonl", manifest);
  char crc_hex[9];
  std::snprintf(crc_hex, sizeof crc_hex, "%08x", summary.crc32);
  detail::write_text(out_dir / "summary.json",
                     nlohmann::json{{"count", summary.count}, {"crc32", crc_hex}}.dump() + "\n");
  return summary;
}

PredictionSet load_prediction_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("prediction directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".s2tl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  PredictionSet out;
  for (const auto& f : files) out.push_back({f.stem().string(), rastercore::read_tile(f)});
  return out;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"n_images", r.n_images}, {"mae_mean", r.mae_mean}, {"psnr_mean_db", r.psnr_mean_db}};
  auto& per = j["per_image"] = nlohmann::json::array();
  for (const auto& m : r.per_image) per.push_back({{"pair_id", m.pair_id}, {"mae", m.mae}, {"psnr_db", m.psnr_db}});
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.n_images = j.at("n_images").get<std::size_t>();
  r.mae_mean = j.at("mae_mean").get<double>();
  r.psnr_mean_db = j.at("psnr_mean_db").get<double>();
  r.per_image.clear();
  for (const auto& m : j.at("per_image")) {
    r.per_image.push_back({m.at("pair_id").get<std::string>(), m.at("mae").get<double>(), m.at("psnr_db").get<double>()});
  }
}

EnsembleMode parse_ensemble_mode(const std::string& name) {
  if (name == "mean" || name == "MEAN") return EnsembleMode::Mean;
  if (name == "assign" || name == "ASSIGN") return EnsembleMode::Assign;
  throw InvalidArgument("unknown ensemble mode '" + name + "'");
}

void to_json(nlohmann::json& j, const EnsembleSpec& s) {
  j = nlohmann::json{{"members", s.members}, {"mode", s.mode == EnsembleMode::Mean ? "mean" : "assign"}};
  if (!s.assignment.empty()) j["assignment"] = s.assignment;
}

void from_json(const nlohmann::json& j, EnsembleSpec& s) {
  for (const auto& [k, _] : j.items()) {
    if (k != "members" && k != "mode" && k != "assignment") throw InvalidArgument("unknown key '" + k + "' in ensemble spec");
  }
  EnsembleSpec d;
  if (j.contains("members")) d.members = j.at("members").get<std::vector<std::string>>();
  if (j.contains("mode")) d.mode = parse_ensemble_mode(j.at("mode").get<std::string>());
  if (j.contains("assignment")) d.assignment = j.at("assignment").get<std::map<std::string, std::string>>();
  s = d;
}

}  // namespace sar2rgb::evalkit
