// Grows one vessel tree inside a disc ROI and writes the structure mask.
//
//   grow_one out.png [seed]

#include <cstdint>
#include <cstdlib>
#include <iostream>

#include "dgssa/io/png.hpp"
#include "dgssa/raster.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: grow_one out.png [seed]\n";
    return 1;
  }
  const int size = 256;
  dgssa::BinaryMask roi(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x + 0.5 - size / 2.0, dy = y + 0.5 - size / 2.0;
      roi(x, y) = dx * dx + dy * dy <= 120.0 * 120.0;
    }
  }

  dgssa::colonize::GrowthParams params;
  params.attraction_radius = 40;
  params.kill_radius = 3;
  params.segment_length = 3;
  params.leaf_radius = 0.8;
  params.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

  dgssa::raster::StructureOptions opts;
  opts.erosion_iterations = 0;
  const auto s = dgssa::raster::make_structure(roi, params, 4000, opts);
  dgssa::io::write_png(argv[1], dgssa::to_pixels(s.mask));
  std::cout << s.tree.size() << " nodes, root radius " << s.tree.nodes.front().radius << ", "
            << dgssa::count_foreground(s.mask) << " vessel pixels\n";
  return 0;
}
