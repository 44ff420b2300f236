// n-dimensional, multi-channel image containers and region arithmetic.
//
// Memory layout is frozen: pixels are stored row-major with the FIRST axis
// fastest-varying, and channels interleaved per pixel. File I/O and every
// flat-offset computation in the library depend on this ordering.
#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sslic {

/// Maximum supported image rank. Covers 1D signals through 3D+channel
/// stacks; raising it only requires bumping this constant.
inline constexpr int kMaxRank = 4;

/// Fixed-capacity vector with one slot per image axis.
template <class T>
class AxisVec {
 public:
  AxisVec() = default;
  AxisVec(std::initializer_list<T> init) {
    if (static_cast<int>(init.size()) > kMaxRank)
      throw std::invalid_argument("AxisVec: at most " + std::to_string(kMaxRank) + " axes");
    for (const T& v : init) v_[n_++] = v;
  }

  static AxisVec filled(int rank, T value) {
    AxisVec out;
    for (int i = 0; i < rank; ++i) out.push_back(value);
    return out;
  }

  int size() const { return n_; }
  bool empty() const { return n_ == 0; }

  T& operator[](int i) {
    assert(i >= 0 && i < n_);
    return v_[i];
  }
  const T& operator[](int i) const {
    assert(i >= 0 && i < n_);
    return v_[i];
  }

  void push_back(T value) {
    if (n_ >= kMaxRank) throw std::invalid_argument("AxisVec: capacity exceeded");
    v_[n_++] = value;
  }

  T* begin() { return v_.data(); }
  T* end() { return v_.data() + n_; }
  const T* begin() const { return v_.data(); }
  const T* end() const { return v_.data() + n_; }
  const T* data() const { return v_.data(); }

  friend bool operator==(const AxisVec& a, const AxisVec& b) {
    if (a.n_ != b.n_) return false;
    return std::equal(a.begin(), a.end(), b.begin());
  }
  friend bool operator!=(const AxisVec& a, const AxisVec& b) { return !(a == b); }

 private:
  std::array<T, kMaxRank> v_{};
  int n_ = 0;
};

using Shape = AxisVec<std::int64_t>;
using Coord = AxisVec<std::int64_t>;
using GridSize = AxisVec<std::int64_t>;

inline std::int64_t pixel_count(const Shape& dims) {
  std::int64_t n = 1;
  for (std::int64_t d : dims) n *= d;
  return n;
}

/// Row-major strides: stride[0] = 1, stride[i] = stride[i-1] * dims[i-1].
inline Shape strides_of(const Shape& dims) {
  Shape s;
  std::int64_t acc = 1;
  for (int i = 0; i < dims.size(); ++i) {
    s.push_back(acc);
    acc *= dims[i];
  }
  return s;
}

namespace detail {

// Unchecked row-major flat offset.
inline std::int64_t linear_offset(const Coord& coord, const Shape& strides) {
  std::int64_t off = 0;
  for (int i = 0; i < coord.size(); ++i) off += coord[i] * strides[i];
  return off;
}

}  // namespace detail

/// Bijective row-major mapping from a coordinate to a flat offset, first
/// dimension fastest-varying. Out-of-bounds coordinates are an error.
inline std::int64_t linear_index(const Coord& coord, const Shape& dims) {
  if (coord.size() != dims.size())
    throw std::out_of_range("linear_index: coordinate rank does not match dims");
  std::int64_t off = 0;
  std::int64_t stride = 1;
  for (int i = 0; i < dims.size(); ++i) {
    if (coord[i] < 0 || coord[i] >= dims[i])
      throw std::out_of_range("linear_index: coordinate outside image");
    off += coord[i] * stride;
    stride *= dims[i];
  }
  return off;
}

/// Inverse of linear_index.
inline Coord decode_index(std::int64_t offset, const Shape& dims) {
  if (offset < 0 || offset >= pixel_count(dims))
    throw std::out_of_range("decode_index: offset outside image");
  Coord c;
  for (int i = 0; i < dims.size(); ++i) {
    c.push_back(offset % dims[i]);
    offset /= dims[i];
  }
  return c;
}

/// Axis-aligned region: start coordinate plus per-axis extent.
/// Clamping against an image is always explicit, never implicit.
struct ImageRegion {
  Coord index;
  Shape size;

  std::int64_t pixel_count() const {
    std::int64_t n = 1;
    for (std::int64_t s : size) n *= std::max<std::int64_t>(s, 0);
    return n;
  }
  bool empty() const { return pixel_count() == 0; }

  friend bool operator==(const ImageRegion& a, const ImageRegion& b) {
    return a.index == b.index && a.size == b.size;
  }
};

/// Intersection of a region with [0, dims). An empty intersection yields a
/// zero-size region. Idempotent.
inline ImageRegion clamp_region(const ImageRegion& region, const Shape& dims) {
  ImageRegion out;
  for (int i = 0; i < dims.size(); ++i) {
    const std::int64_t lo = std::clamp<std::int64_t>(region.index[i], 0, dims[i]);
    const std::int64_t hi = std::clamp<std::int64_t>(region.index[i] + std::max<std::int64_t>(region.size[i], 0), lo, dims[i]);
    out.index.push_back(lo);
    out.size.push_back(hi - lo);
  }
  return out;
}

inline ImageRegion intersect_regions(const ImageRegion& a, const ImageRegion& b) {
  ImageRegion out;
  for (int i = 0; i < a.index.size(); ++i) {
    const std::int64_t lo = std::max(a.index[i], b.index[i]);
    const std::int64_t hi = std::min(a.index[i] + a.size[i], b.index[i] + b.size[i]);
    out.index.push_back(lo);
    out.size.push_back(std::max<std::int64_t>(hi - lo, 0));
  }
  return out;
}

/// Ordered stream of the coordinates inside a region, row-major with the
/// first axis fastest. The region must already be clamped.
class RegionRange {
 public:
  explicit RegionRange(ImageRegion region) : region_(std::move(region)) {}

  class iterator {
   public:
    using value_type = Coord;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const ImageRegion* region, bool at_end) : region_(region), done_(at_end) {
      if (region_ && !done_) {
        current_ = region_->index;
        done_ = region_->empty();
      }
    }

    const Coord& operator*() const { return current_; }
    iterator& operator++() {
      for (int a = 0; a < current_.size(); ++a) {
        if (++current_[a] < region_->index[a] + region_->size[a]) return *this;
        current_[a] = region_->index[a];
      }
      done_ = true;
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ != b.done_) return false;
      return a.done_ || a.current_ == b.current_;
    }
    friend bool operator!=(const iterator& a, const iterator& b) { return !(a == b); }

   private:
    const ImageRegion* region_ = nullptr;
    Coord current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(&region_, false); }
  iterator end() const { return iterator(&region_, true); }

 private:
  ImageRegion region_;
};

inline RegionRange region_pixels(const ImageRegion& region) { return RegionRange(region); }

/// n-dimensional scalar field with c interleaved channels per pixel.
/// All values are finite; rank is 1..kMaxRank.
class NDImage {
 public:
  NDImage(Shape dims, int channels, std::vector<double> data)
      : dims_(std::move(dims)), channels_(channels), data_(std::move(data)) {
    if (dims_.size() < 1 || dims_.size() > kMaxRank)
      throw std::invalid_argument("NDImage: rank must be in [1, " + std::to_string(kMaxRank) + "]");
    for (std::int64_t d : dims_)
      if (d < 1) throw std::invalid_argument("NDImage: extents must be positive");
    if (channels_ < 1) throw std::invalid_argument("NDImage: channels must be >= 1");
    if (static_cast<std::int64_t>(data_.size()) != channels_ * sslic::pixel_count(dims_))
      throw std::invalid_argument("NDImage: data length must be channels * product(dims)");
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("NDImage: non-finite value");
  }

  static NDImage zeros(Shape dims, int channels) {
    std::int64_t n = 1;
    for (std::int64_t d : dims) n *= d;
    return NDImage(std::move(dims), channels, std::vector<double>(static_cast<std::size_t>(n * channels), 0.0));
  }

  const Shape& dims() const { return dims_; }
  int rank() const { return dims_.size(); }
  int channels() const { return channels_; }
  std::int64_t pixel_count() const { return sslic::pixel_count(dims_); }

  ImageRegion full_region() const { return ImageRegion{Coord::filled(rank(), 0), dims_}; }

  std::span<const double> pixel(std::int64_t offset) const {
    return {data_.data() + offset * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<double> pixel(std::int64_t offset) {
    return {data_.data() + offset * channels_, static_cast<std::size_t>(channels_)};
  }

  double at(const Coord& coord, int channel) const {
    return data_[linear_index(coord, dims_) * channels_ + channel];
  }
  double& at(const Coord& coord, int channel) {
    return data_[linear_index(coord, dims_) * channels_ + channel];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  Shape dims_;
  int channels_;
  std::vector<double> data_;
};

/// Per-pixel label image. UNDEFINED marks pixels not yet claimed by any
/// cluster; a completed run leaves none.
class LabelMap {
 public:
  static constexpr std::uint32_t kUndefined = std::numeric_limits<std::uint32_t>::max();

  explicit LabelMap(Shape dims)
      : dims_(std::move(dims)),
        labels_(static_cast<std::size_t>(sslic::pixel_count(dims_)), kUndefined) {}

  const Shape& dims() const { return dims_; }
  int rank() const { return dims_.size(); }
  std::int64_t pixel_count() const { return static_cast<std::int64_t>(labels_.size()); }

  std::uint32_t operator[](std::int64_t offset) const { return labels_[offset]; }
  std::uint32_t& operator[](std::int64_t offset) { return labels_[offset]; }
  std::uint32_t at(const Coord& coord) const { return labels_[linear_index(coord, dims_)]; }
  std::uint32_t& at(const Coord& coord) { return labels_[linear_index(coord, dims_)]; }

  const std::vector<std::uint32_t>& data() const { return labels_; }
  std::vector<std::uint32_t>& data() { return labels_; }

  friend bool operator==(const LabelMap& a, const LabelMap& b) {
    return a.dims_ == b.dims_ && a.labels_ == b.labels_;
  }

 private:
  Shape dims_;
  std::vector<std::uint32_t> labels_;
};

/// Per-pixel best squared distance, +infinity where the label is UNDEFINED.
class DistanceMap {
 public:
  explicit DistanceMap(Shape dims)
      : dims_(std::move(dims)),
        values_(static_cast<std::size_t>(sslic::pixel_count(dims_)),
                std::numeric_limits<double>::infinity()) {}

  const Shape& dims() const { return dims_; }
  std::int64_t pixel_count() const { return static_cast<std::int64_t>(values_.size()); }

  double operator[](std::int64_t offset) const { return values_[offset]; }
  double& operator[](std::int64_t offset) { return values_[offset]; }

  const std::vector<double>& data() const { return values_; }
  std::vector<double>& data() { return values_; }

 private:
  Shape dims_;
  std::vector<double> values_;
};

}  // namespace sslic
