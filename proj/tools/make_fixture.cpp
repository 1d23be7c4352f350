// Writes the hand-set fixture weights used by the conditional-gain check, or
// seeded random desk-config weights when a seed is given.
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "camsic/error.hpp"
#include "camsic/weights.hpp"
#include "fixture_weights.hpp"

int main(int argc, char** argv) {
  if (argc != 2 && argc != 3) {
    std::fprintf(stderr, "usage: %s OUT.cwts [SEED]\n", argv[0]);
    return 2;
  }
  try {
    const auto store = argc == 3
                           ? camsic::make_random_weights(camsic::ModelConfig::desk(), std::strtoull(argv[2], nullptr, 10))
                           : camsic::fixture::make_fixture_weights();
    std::ofstream out(argv[1], std::ios::binary);
    if (!out) camsic::fail(camsic::ErrorCode::kIo, std::string("cannot open ") + argv[1]);
    camsic::save_weights(store, out);
    std::printf("wrote %s digest %08x\n", argv[1], camsic::weights_digest(store));
  } catch (const camsic::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  return 0;
}
