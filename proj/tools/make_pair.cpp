// Renders a synthetic stereo pair to two PPM files.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "camsic/error.hpp"
#include "camsic/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 4 || argc > 6) {
    std::fprintf(stderr, "usage: %s SEED LEFT.ppm RIGHT.ppm [HEIGHT [WIDTH]]\n", argv[0]);
    return 2;
  }
  try {
    camsic::SyntheticStereoSpec spec;
    if (argc >= 5) spec.height = spec.width = std::atoi(argv[4]);
    if (argc == 6) spec.width = std::atoi(argv[5]);
    const auto pair = camsic::make_synthetic_pair(std::strtoull(argv[1], nullptr, 10), spec);
    camsic::write_ppm(argv[2], pair.views[0]);
    camsic::write_ppm(argv[3], pair.views[1]);
    std::printf("disparity %d\n", pair.disparity);
  } catch (const camsic::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  return 0;
}
