#include "mocp/rng.hpp"

namespace mocp {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t mix_child(std::uint64_t parent, std::uint64_t child)
{
  return splitmix64(parent ^ splitmix64(child + 0x632be59bd9b4e019ULL));
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> path)
  : seed_(seed)
  , path_(std::move(path))
  , key_(splitmix64(seed))
{
  for (auto c : path_)
    key_ = mix_child(key_, c);
}

RngStream RngStream::derive(std::uint64_t child) const
{
  RngStream out = *this;
  out.path_.push_back(child);
  out.key_ = mix_child(key_, child);
  return out;
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> children) const
{
  RngStream out = *this;
  for (auto c : children)
    out = out.derive(c);
  return out;
}

} // namespace mocp
