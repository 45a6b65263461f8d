#include "branch/rng.h"

namespace branch
{
namespace
{
uint64_t splitmix64(uint64_t x)
{
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

uint64_t derive_seed(uint64_t root, std::string_view stream, uint64_t index)
{
  uint64_t h = splitmix64(root);
  for (const char c : stream) h = splitmix64(h ^ static_cast<uint64_t>(static_cast<unsigned char>(c)));
  return splitmix64(h ^ index);
}

}  // namespace branch
