#include "mpm/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mpm/errors.hpp"

namespace mpm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.csv", index);
  return buf;
}

namespace {

void append(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out += buf;
}

json report_json(const MacroStepReport& r) {
  return {{"mode", to_string(r.mode)},
          {"substeps", r.substeps},
          {"substep_dt", r.substep_dt},
          {"lambda", r.lambda},
          {"objective", r.objective},
          {"cg_iterations", r.cg_iterations},
          {"cg_residual", r.cg_residual},
          {"cfl_violated", r.cfl_violated},
          {"scattered_target_ke", r.scattered_target_ke},
          {"grid_ke", r.grid_ke},
          {"particle_ke", r.particle_ke},
          {"dissipation", r.dissipation}};
}

json diagnostics_json(const Frame& f) {
  const Diagnostics& d = f.diagnostics;
  json j = {{"index", f.index},
            {"time", f.time},
            {"total_mass", d.total_mass},
            {"momentum", json::array({d.momentum.x(), d.momentum.y()})},
            {"kinetic_energy", d.kinetic_energy},
            {"elastic_energy", d.elastic_energy},
            {"gravitational_energy", d.gravitational_energy},
            {"total_energy", d.total_energy()}};
  if (d.macro) j["macro_step"] = report_json(*d.macro);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::string frame_csv(const Frame& frame) {
  std::string out = kFrameHeader;
  out += '\n';
  out.reserve(frame.particles.size() * 200);
  for (std::size_t p = 0; p < frame.particles.size(); ++p) {
    const Particle& part = frame.particles[p];
    out += std::to_string(p);
    const double values[] = {part.x.x(), part.x.y(), part.v.x(),  part.v.y(),
                             part.F(0, 0), part.F(0, 1), part.F(1, 0), part.F(1, 1)};
    for (double v : values) {
      out += ',';
      append(out, v);
    }
    out += '\n';
  }
  return out;
}

fs::path write_frame(const Frame& frame, const fs::path& out_dir) {
  const fs::path path = out_dir / frame_file_name(frame.index);
  write_text(path, frame_csv(frame));
  return path;
}

fs::path write_manifest(const SceneConfig& config, const std::vector<Frame>& frames,
                        const fs::path& out_dir) {
  json manifest;
  manifest["config"] = json::parse(scene_to_json(config));
  manifest["frames"] = json::array();
  manifest["diagnostics"] = json::array();
  for (const Frame& f : frames) {
    manifest["frames"].push_back(
        {{"index", f.index}, {"time", f.time}, {"file", frame_file_name(f.index)}});
    manifest["diagnostics"].push_back(diagnostics_json(f));
  }
  const fs::path path = out_dir / "manifest.json";
  write_text(path, manifest.dump(2) + "\n");
  return path;
}

std::vector<Vec2> read_frame_positions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open frame file");
  std::string line;
  if (!std::getline(in, line) || line != kFrameHeader) {
    throw IoError(path.string(), "missing or unexpected frame header");
  }
  std::vector<Vec2> positions;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, x, y;
    if (!std::getline(fields, id, ',') || !std::getline(fields, x, ',') ||
        !std::getline(fields, y, ',')) {
      throw IoError(path.string(), "malformed row " + std::to_string(row));
    }
    try {
      positions.emplace_back(std::stod(x), std::stod(y));
    } catch (const std::exception&) {
      throw IoError(path.string(), "malformed number on row " + std::to_string(row));
    }
  }
  return positions;
}

namespace {

std::set<std::string> frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string(), "not a directory");
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".csv") names.insert(name);
  }
  return names;
}

}  // namespace

std::vector<FrameDeviation> diff_runs(const fs::path& a, const fs::path& b) {
  const std::set<std::string> names_a = frame_files(a);
  const std::set<std::string> names_b = frame_files(b);
  if (names_a != names_b) {
    throw Error("runs " + a.string() + " and " + b.string() + " contain different frame files");
  }
  std::vector<FrameDeviation> out;
  for (const std::string& name : names_a) {
    const std::vector<Vec2> xa = read_frame_positions(a / name);
    const std::vector<Vec2> xb = read_frame_positions(b / name);
    if (xa.size() != xb.size()) throw Error(name + ": particle counts differ");
    FrameDeviation dev;
    dev.frame = name;
    double sum = 0.0;
    for (std::size_t p = 0; p < xa.size(); ++p) {
      const double d = (xa[p] - xb[p]).norm();
      sum += d * d;
      dev.max = std::max(dev.max, d);
    }
    dev.rms = xa.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(xa.size()));
    out.push_back(dev);
  }
  return out;
}

}  // namespace mpm
