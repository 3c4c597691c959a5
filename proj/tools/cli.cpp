#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/detect/detector.hpp"
#include "wnet/detect/matching.hpp"
#include "wnet/detect/report.hpp"
#include "wnet/error.hpp"
#include "wnet/masks.hpp"
#include "wnet/nn/checkpoint.hpp"
#include "wnet/service/annotation_store.hpp"
#include "wnet/service/http_service.hpp"
#include "wnet/synth.hpp"
#include "wnet/train/split.hpp"
#include "wnet/train/trainer.hpp"

namespace wnet::cli {
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::not_found, "no directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- generate ---------------------------------------------------------------

struct GenerateOptions {
  int n = 0;
  std::string difficulty = "easy";
  int size = 128;
  std::uint64_t seed = 0;
  fs::path out;
};

void run_generate(const GenerateOptions& o, std::ostream& out) {
  auto spec = synth::SceneSpec::preset(synth::difficulty_from_string(o.difficulty));
  spec.height = spec.width = o.size;
  const auto samples = synth::generate_dataset(o.n, spec, o.seed);
  for (const auto& s : samples) {
    save_tile(o.out / "tiles" / (s.tile.id() + ".ppm"), s.tile);
    write_file_atomic(o.out / "points" / (s.tile.id() + ".json"), write_points(s.truth));
  }
  write_file_atomic(o.out / "manifest.json", synth::write_manifest(samples, o.seed));
  out << nlohmann::json{{"generated", samples.size()}, {"out", o.out.string()}}.dump() << "\n";
}

// --- masks ------------------------------------------------------------------

struct MasksOptions {
  fs::path points_dir;
  fs::path tiles_dir;
  std::optional<int> size;
  DensityConfig density;
  fs::path out;
};

std::pair<int, int> tile_extent(const MasksOptions& o, const std::string& id) {
  const fs::path tiles = o.tiles_dir.empty() ? o.points_dir.parent_path() / "tiles" : o.tiles_dir;
  const fs::path tile = tiles / (id + ".ppm");
  if (fs::exists(tile)) {
    const ImageTile t = load_tile(tile);
    return {t.height(), t.width()};
  }
  if (o.size) return {*o.size, *o.size};
  throw Error(ErrorKind::not_found, "no tile " + tile.string() + " to size the masks of '" + id + "' (pass --size)");
}

void run_masks(const MasksOptions& o, std::ostream& out) {
  o.density.validate();
  std::size_t count = 0;
  for (const auto& path : files_with_extension(o.points_dir, ".json")) {
    const PointSet pts = read_points(read_text_file(path));
    const std::string id = path.stem().string();
    const auto [h, w] = tile_extent(o, id);
    pts.check_bounds(h, w);
    write_file_atomic(o.out / "binary" / (id + ".pgm"), encode_binary(render_binary_target(pts, h, w, o.density)));
    write_file_atomic(o.out / "density" / (id + ".pgm"), encode_density(render_density(pts, h, w, o.density)));
    write_file_atomic(o.out / "dots" / (id + ".pgm"), encode_binary(render_dots(pts, h, w, o.density)));
    ++count;
  }
  out << nlohmann::json{{"masks", count}, {"out", o.out.string()}}.dump() << "\n";
}

// --- train ------------------------------------------------------------------

struct TrainOptions {
  fs::path data;
  fs::path config;
  fs::path out;
};

train::Sample load_sample(const fs::path& data, const std::string& id, const DensityConfig& density) {
  const ImageTile tile = load_tile(data / "tiles" / (id + ".ppm"));
  const fs::path binary = data / "masks" / "binary" / (id + ".pgm");
  const fs::path dens = data / "masks" / "density" / (id + ".pgm");
  if (fs::exists(binary) && fs::exists(dens)) {
    return {tile, {decode_binary(read_file(binary), id), decode_density(read_file(dens), id)}};
  }
  const PointSet pts = read_points(read_text_file(data / "points" / (id + ".json")));
  return train::make_sample(tile, pts, density);
}

void run_train(const TrainOptions& o, std::ostream& out) {
  const train::RunConfig cfg =
      o.config.empty() ? train::parse_run_config("") : train::parse_run_config(read_text_file(o.config));
  std::vector<std::string> ids;
  for (const auto& p : files_with_extension(o.data / "tiles", ".ppm")) ids.push_back(p.stem().string());
  const auto split = train::split_dataset(ids, cfg.train.split, cfg.train.seed);

  auto load_all = [&](const std::vector<std::string>& which) {
    std::vector<train::Sample> v;
    for (const auto& id : which) v.push_back(load_sample(o.data, id, cfg.density));
    return v;
  };
  const auto train_set = load_all(split.train);
  const auto val_set = load_all(split.val);

  fs::create_directories(o.out);
  write_file_atomic(o.out / "split.json",
                    nlohmann::json{{"train", split.train}, {"val", split.val}, {"test", split.test}}.dump(2));
  write_file_atomic(o.out / "config.txt", train::format_run_config(cfg));

  const auto model = nn::build_model(cfg.model, cfg.train.seed);
  const auto result = train::train(model, train_set, val_set, cfg.train, cfg.loss, o.out);
  if (!result.checkpoint) nn::save_checkpoint(o.out / "model.ckpt", result.best_model, {result.loss.l1_ratio, 0, {}});
  out << nlohmann::json{{"steps", result.state.step},
                        {"checks", result.state.history.size()},
                        {"final_lr", result.state.current_lr},
                        {"best_val_loss", result.state.best_val_loss},
                        {"l1_ratio", result.loss.l1_ratio.value_or(0.0)},
                        {"checkpoint", (o.out / "model.ckpt").string()}}
             .dump()
      << "\n";
}

// --- detect -----------------------------------------------------------------

struct DetectOptions {
  fs::path model;
  fs::path image;
  detect::PeakConfig peaks;
  fs::path out;
};

bool is_density_raster(const Bytes& bytes) {
  // 16-bit grayscale means a density mask rather than a tile.
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') return false;
  try {
    (void)decode_density(bytes);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void run_detect(const DetectOptions& o, std::ostream& out) {
  o.peaks.validate();
  std::optional<detect::Detector> detector;
  auto detect_one = [&](const fs::path& path) {
    const Bytes bytes = read_file(path);
    const std::string id = path.stem().string();
    if (is_density_raster(bytes)) return detect::extract_peaks(decode_density(bytes, id), o.peaks);
    if (!detector) {
      if (o.model.empty()) throw Error(ErrorKind::unavailable, "--model is required to detect on an RGB tile");
      detector.emplace(std::make_shared<nn::WNetModel>(nn::load_checkpoint(o.model).model), o.peaks);
    }
    return detector->detect(decode_tile(bytes, id));
  };

  if (fs::is_directory(o.image)) {
    std::vector<fs::path> inputs = files_with_extension(o.image, ".ppm");
    for (const auto& p : files_with_extension(o.image, ".pgm")) inputs.push_back(p);
    std::size_t total = 0;
    for (const auto& p : inputs) {
      const auto d = detect_one(p);
      total += d.centers.size();
      write_file_atomic(o.out / (d.image_id + ".json"), detect::write_detection(d));
    }
    out << nlohmann::json{{"images", inputs.size()}, {"centers", total}}.dump() << "\n";
  } else {
    const auto d = detect_one(o.image);
    write_file_atomic(o.out, detect::write_detection(d));
    out << nlohmann::json{{"image_id", d.image_id}, {"centers", d.centers.size()}}.dump() << "\n";
  }
}

// --- eval -------------------------------------------------------------------

struct EvalOptions {
  fs::path pred;
  fs::path truth;
  double radius = detect::kDefaultMatchRadius;
  std::string format = "table";
};

void run_eval(const EvalOptions& o, std::ostream& out) {
  std::vector<std::pair<PointSet, PointSet>> pairs;  // (pred, truth)
  if (fs::is_directory(o.truth)) {
    if (!fs::is_directory(o.pred)) throw Error(ErrorKind::config, "--pred must be a directory when --truth is");
    for (const auto& t : files_with_extension(o.truth, ".json")) {
      const fs::path p = o.pred / t.filename();
      if (!fs::exists(p)) throw Error(ErrorKind::not_found, "no prediction " + p.string());
      pairs.emplace_back(detect::read_prediction_points(read_text_file(p)), read_points(read_text_file(t)));
    }
  } else {
    pairs.emplace_back(detect::read_prediction_points(read_text_file(o.pred)), read_points(read_text_file(o.truth)));
  }
  if (pairs.empty()) throw Error(ErrorKind::not_found, "no ground-truth files under " + o.truth.string());

  std::vector<detect::MatchReport> reports;
  for (const auto& [pred, truth] : pairs) {
    reports.push_back(detect::match(pred.points(), truth.points(), o.radius, truth.image_id()));
  }
  const auto agg = detect::aggregate(reports);
  if (o.format == "json") {
    out << detect::write_evaluation_json(reports, agg) << "\n";
  } else {
    out << detect::format_table({{"micro", agg.micro.precision, agg.micro.recall, agg.micro.f1},
                                 {"macro", agg.macro.precision, agg.macro.recall, agg.macro.f1}});
  }
}

// --- serve ------------------------------------------------------------------

struct ServeOptions {
  int port = 8080;
  std::string host = "127.0.0.1";
  fs::path model;
  fs::path store_dir;
  detect::PeakConfig peaks;
};

void run_serve(const ServeOptions& o, std::ostream& out) {
  auto store = std::make_shared<service::AnnotationStore>(o.store_dir);
  std::shared_ptr<const detect::Detector> detector;
  if (!o.model.empty()) {
    detector = std::make_shared<detect::Detector>(
        std::make_shared<nn::WNetModel>(nn::load_checkpoint(o.model).model), o.peaks);
  }
  service::HttpService svc(store, detector);
  out << nlohmann::json{{"listening", o.host + ":" + std::to_string(o.port)}, {"model", !o.model.empty()}}.dump()
      << std::endl;
  svc.run(o.host, o.port);
}

void print_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << "error kind=" << kind << " message=" << nlohmann::json(message).dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage nucleus detection toolkit", "wnet"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic H&E-like dataset");
  generate->add_option("--n", gen.n, "Number of tiles")->required()->check(CLI::PositiveNumber);
  generate->add_option("--difficulty", gen.difficulty, "easy, medium or hard")
      ->check(CLI::IsMember({"easy", "medium", "hard"}));
  generate->add_option("--size", gen.size, "Tile edge length in pixels")->check(CLI::Range(8, 4096));
  generate->add_option("--seed", gen.seed, "Seed of the first tile");
  generate->add_option("--out", gen.out, "Output directory")->required();

  MasksOptions masks;
  auto* masks_cmd = app.add_subcommand("masks", "Render training targets from point files");
  masks_cmd->add_option("--points-dir", masks.points_dir, "Directory of points JSON files")->required();
  masks_cmd->add_option("--tiles-dir", masks.tiles_dir, "Tiles used for raster size (default <points-dir>/../tiles)");
  masks_cmd->add_option("--size", masks.size, "Raster size when no tile is available");
  masks_cmd->add_option("--d", masks.density.radius_px, "Density radius in pixels");
  masks_cmd->add_option("--alpha", masks.density.sharpness, "Density decay sharpness");
  masks_cmd->add_option("--dot-radius", masks.density.dot_radius, "Solid dot radius in pixels");
  masks_cmd->add_option("--out", masks.out, "Output directory")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a W-Net on a generated dataset");
  train_cmd->add_option("--data", tr.data, "Dataset directory (tiles/, points/, optional masks/)")->required();
  train_cmd->add_option("--config", tr.config, "Key-value config file");
  train_cmd->add_option("--out", tr.out, "Output directory for checkpoint and log")->required();

  DetectOptions det;
  auto* detect_cmd = app.add_subcommand("detect", "Detect nucleus centers");
  detect_cmd->add_option("--model", det.model, "Checkpoint (not needed for density-mask input)");
  detect_cmd->add_option("--image", det.image, "Tile (PPM), density mask (16-bit PGM) or a directory")->required();
  detect_cmd->add_option("--threshold", det.peaks.threshold, "Minimum peak value");
  detect_cmd->add_option("--min-dist", det.peaks.nms_min_distance, "Minimum distance between peaks");
  detect_cmd->add_option("--out", det.out, "Detection JSON file, or directory for directory input")->required();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Prediction file or directory")->required();
  eval_cmd->add_option("--truth", ev.truth, "Ground-truth file or directory")->required();
  eval_cmd->add_option("--radius", ev.radius, "Match radius in pixels (strict)")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--format", ev.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  ServeOptions sv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  serve_cmd->add_option("--port", sv.port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", sv.host, "Bind address");
  serve_cmd->add_option("--model", sv.model, "Checkpoint used for auto-detection");
  serve_cmd->add_option("--store-dir", sv.store_dir, "Annotation store directory")->required();
  serve_cmd->add_option("--threshold", sv.peaks.threshold, "Minimum peak value");
  serve_cmd->add_option("--min-dist", sv.peaks.nms_min_distance, "Minimum distance between peaks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*generate) run_generate(gen, out);
    else if (*masks_cmd) run_masks(masks, out);
    else if (*train_cmd) run_train(tr, out);
    else if (*detect_cmd) run_detect(det, out);
    else if (*eval_cmd) run_eval(ev, out);
    else if (*serve_cmd) run_serve(sv, out);
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace wnet::cli
