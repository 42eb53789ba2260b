#include "ivae/pgm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ivae {

void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != static_cast<size_t>(width) * static_cast<size_t>(height))
    throw std::invalid_argument("write_pgm: pixel count mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_pgm: cannot write " + path);
  os << "P5\n" << width << " " << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
}

std::uint8_t pixel_to_byte(double p) {
  const double v = (p - 0.001) / 0.998 * 255.0;
  const double r = std::nearbyint(v);  // default FE_TONEAREST: half to even
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

ReconGrid make_recon_grid(const Mat& originals, const Mat& mean_recon,
                          const Mat& sample_recon, int img_rows, int img_cols,
                          int grid_cols) {
  const Eigen::Index count = originals.cols();
  if (mean_recon.cols() != count || sample_recon.cols() != count ||
      originals.rows() != Eigen::Index(img_rows) * img_cols)
    throw std::invalid_argument("make_recon_grid: shape mismatch");
  if (grid_cols < 1) throw std::invalid_argument("make_recon_grid: grid_cols");
  const int block_rows =
      static_cast<int>((count + grid_cols - 1) / grid_cols);
  ReconGrid g;
  g.width = grid_cols * img_cols;
  g.height = 3 * block_rows * img_rows;
  g.pixels.assign(static_cast<size_t>(g.width) * g.height, 0);
  const Mat* tiers[3] = {&originals, &mean_recon, &sample_recon};
  for (Eigen::Index i = 0; i < count; ++i) {
    const int br = static_cast<int>(i) / grid_cols;
    const int gc = static_cast<int>(i) % grid_cols;
    for (int tier = 0; tier < 3; ++tier) {
      const Mat& src = *tiers[tier];
      for (int r = 0; r < img_rows; ++r)
        for (int c = 0; c < img_cols; ++c) {
          const int y = (3 * br + tier) * img_rows + r;
          const int x = gc * img_cols + c;
          g.pixels[static_cast<size_t>(y) * g.width + x] =
              pixel_to_byte(src(Eigen::Index(r) * img_cols + c, i));
        }
    }
  }
  return g;
}

}  // namespace ivae
