#include "ued/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ued::kernels {

const Backend* avx2_backend_if_supported();
const Backend* neon_backend_if_supported();

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> out{&scalar_backend()};
  if (const Backend* b = avx2_backend_if_supported()) out.push_back(b);
  if (const Backend* b = neon_backend_if_supported()) out.push_back(b);
  return out;
}

const Backend* find_backend(std::string_view name) {
  for (const Backend* b : available_backends()) {
    if (name == b->name) return b;
  }
  return nullptr;
}

namespace {

const Backend* pick_default() {
  if (const char* env = std::getenv("UED_KERNEL_BACKEND")) {
    if (const Backend* b = find_backend(env)) return b;
  }
  const auto all = available_backends();
  return all.back();  // best available: SIMD variant when present
}

const Backend*& active_slot() {
  static const Backend* a = pick_default();
  return a;
}

}  // namespace

const Backend& active() { return *active_slot(); }

void set_active(const Backend& b) { active_slot() = &b; }

}  // namespace ued::kernels
