#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivae/data.hpp"
#include "ivae/model.hpp"

namespace ivae {

// Binary PGM (P5, maxval 255), header "P5\n<w> <h>\n255\n" byte-exact.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& pixels);

// Maps a pixel from [0.001, 0.999] back to a byte by the inverse affine
// map, rounding half to even.
std::uint8_t pixel_to_byte(double p);

// Lays out the reconstruction grid in repeated row triplets:
// original / mean-path reconstruction / sample-path reconstruction.
// Each entry of `images` is a triple-column matrix block source; images
// are img_rows x img_cols, column-major per dataset convention.
struct ReconGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

ReconGrid make_recon_grid(const Mat& originals, const Mat& mean_recon,
                          const Mat& sample_recon, int img_rows, int img_cols,
                          int grid_cols);

}  // namespace ivae
