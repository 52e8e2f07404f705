#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mpm/diagnostics.hpp"
#include "mpm/particles.hpp"
#include "mpm/scene.hpp"

namespace mpm {

struct Frame {
  int index = 0;
  double time = 0.0;
  std::vector<Particle> particles;
  Diagnostics diagnostics;
};

inline constexpr const char* kFrameHeader = "id,x,y,vx,vy,Fxx,Fxy,Fyx,Fyy";

/// "frame_0007.csv"
std::string frame_file_name(int index);

/// CSV text of one frame, 17 significant digits per value.
std::string frame_csv(const Frame& frame);

/// Writes frame_NNNN.csv into `out_dir` and returns its path.
std::filesystem::path write_frame(const Frame& frame,
                                  const std::filesystem::path& out_dir);

/// Writes manifest.json: config echo, frame files and per-frame diagnostics.
std::filesystem::path write_manifest(const SceneConfig& config,
                                     const std::vector<Frame>& frames,
                                     const std::filesystem::path& out_dir);

/// Particle positions of a frame file, in row order.
std::vector<Vec2> read_frame_positions(const std::filesystem::path& path);

struct FrameDeviation {
  std::string frame;  // file name
  double rms = 0.0;
  double max = 0.0;
};

/// Pairs frame files of two run directories by name and reports RMS and
/// max particle position deviation for each.
std::vector<FrameDeviation> diff_runs(const std::filesystem::path& a,
                                      const std::filesystem::path& b);

}  // namespace mpm
