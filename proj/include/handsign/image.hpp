#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handsign/error.hpp"

namespace handsign {

/// Row-major pixel grid. Width and height are always consistent with the
/// length of the data vector.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(int width, int height, T fill = T{})
        : width_(checked_dim(width)), height_(checked_dim(height)),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill)
    {
    }

    Grid(int width, int height, std::vector<T> data)
        : width_(checked_dim(width)), height_(checked_dim(height)), data_(std::move(data))
    {
        if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
            throw DimensionMismatch("grid data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(width_) + "x" +
                                    std::to_string(height_));
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool same_shape(const Grid& other) const
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    static int checked_dim(int d)
    {
        if (d < 0) {
            throw DimensionMismatch("negative image dimension");
        }
        return d;
    }

    std::size_t index(int x, int y) const
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Millimeter depth. Zero means no reading.
using DepthImage = Grid<std::uint16_t>;

/// Values in {0,1}.
using BinaryImage = Grid<std::uint8_t>;

enum class IntensityDomain { integer, normalized };

/// Grayscale image, either integral values in [0,255] or normalized to [0,1].
class IntensityImage : public Grid<float> {
public:
    IntensityImage() = default;
    IntensityImage(int width, int height, float fill = 0.0F,
                   IntensityDomain domain = IntensityDomain::integer)
        : Grid<float>(width, height, fill), domain_(domain)
    {
    }
    IntensityImage(int width, int height, std::vector<float> data,
                   IntensityDomain domain = IntensityDomain::integer)
        : Grid<float>(width, height, std::move(data)), domain_(domain)
    {
    }

    IntensityDomain domain() const { return domain_; }
    void set_domain(IntensityDomain d) { domain_ = d; }

    float max_value() const { return domain_ == IntensityDomain::integer ? 255.0F : 1.0F; }

    friend bool operator==(const IntensityImage& a, const IntensityImage& b)
    {
        return a.domain_ == b.domain_ &&
               static_cast<const Grid<float>&>(a) == static_cast<const Grid<float>&>(b);
    }

private:
    IntensityDomain domain_ = IntensityDomain::integer;
};

/// Scale and translation taking intensity-frame pixel coordinates to the
/// depth-frame coordinates the mask was computed in.
struct MaskAlignment {
    double scale_x = 1.0;
    double scale_y = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;

    bool valid() const { return scale_x > 0.0 && scale_y > 0.0; }
    bool is_identity() const
    {
        return scale_x == 1.0 && scale_y == 1.0 && offset_x == 0.0 && offset_y == 0.0;
    }
};

}  // namespace handsign
