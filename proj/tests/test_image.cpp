#include <catch2/catch_amalgamated.hpp>

#include "geodefault/image.hpp"
#include "helpers.hpp"

using namespace geodefault;

TEST_CASE("raster containers validate dimensions and index correctly") {
    CHECK_THROWS_AS(RgbImage(0, 4), Error);
    CHECK_THROWS_AS(RgbImage(4, -1), Error);
    CHECK_THROWS_AS(GrayImage(0, 0), Error);

    RgbImage rgb(3, 2);
    CHECK(rgb.data.size() == 18);
    rgb.set_pixel(2, 1, 10, 20, 30);
    CHECK(rgb.data[rgb.pixel_index(2, 1)] == 10);
    CHECK(rgb.data[rgb.pixel_index(2, 1) + 2] == 30);

    GrayImage gray(3, 2, 9);
    CHECK(gray.data.size() == 6);
    CHECK(gray.at(0, 0) == 9);
    gray.at(1, 1) = 77;
    CHECK(gray.at(1, 1) == 77);
    CHECK(gray.shape() == "3x2");
}

TEST_CASE("default grayscale uses the BT.601 triple") {
    RgbImage img(4, 1);
    img.set_pixel(0, 0, 255, 0, 0);
    img.set_pixel(1, 0, 0, 255, 0);
    img.set_pixel(2, 0, 0, 0, 255);
    img.set_pixel(3, 0, 255, 255, 255);
    const GrayImage g = to_grayscale(img);
    CHECK(g.at(0, 0) == 76);  // 0.299 * 255 = 76.245
    CHECK(g.at(1, 0) == 150); // 0.587 * 255 = 149.685
    CHECK(g.at(2, 0) == 29);  // 0.114 * 255 = 29.07
    CHECK(g.at(3, 0) == 255);

    RgbImage mixed(1, 1);
    mixed.set_pixel(0, 0, 30, 60, 90);
    CHECK(to_grayscale(mixed).at(0, 0) == 54); // 8.97 + 35.22 + 10.26 = 54.45
}

TEST_CASE("ties round half away from zero, not to even") {
    RgbImage img(1, 1);
    img.set_pixel(0, 0, 1, 0, 0);
    CHECK(to_grayscale(img, GrayWeights{0.5, 0.25, 0.25}).at(0, 0) == 1); // 0.5 -> 1
    img.set_pixel(0, 0, 3, 0, 0);
    CHECK(to_grayscale(img, GrayWeights{0.5, 0.25, 0.25}).at(0, 0) == 2); // 1.5 -> 2
    img.set_pixel(0, 0, 5, 0, 0);
    CHECK(to_grayscale(img, GrayWeights{0.5, 0.25, 0.25}).at(0, 0) == 3); // 2.5 -> 3
}

TEST_CASE("out-of-range weighted sums clamp to [0, 255]") {
    RgbImage img(1, 1);
    img.set_pixel(0, 0, 200, 200, 200);
    CHECK(to_grayscale(img, GrayWeights{1.0, 1.0, 1.0}).at(0, 0) == 255);
    img.set_pixel(0, 0, 255, 0, 0);
    CHECK(to_grayscale(img, GrayWeights{-1.0, 0.0, 0.0}).at(0, 0) == 0);
}

TEST_CASE("alternate luma set is accepted") {
    RgbImage img(1, 1);
    img.set_pixel(0, 0, 255, 255, 255);
    CHECK(to_grayscale(img, GrayWeights{0.2125, 0.7154, 0.0721}).at(0, 0) == 255);
    img.set_pixel(0, 0, 100, 100, 100);
    CHECK(to_grayscale(img, GrayWeights{0.2125, 0.7154, 0.0721}).at(0, 0) == 100);
}

TEST_CASE("grayscale output is per-pixel independent") {
    const RgbImage img = testutil::random_rgb(13, 9, 1234);
    const GrayImage whole = to_grayscale(img);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            RgbImage one(1, 1);
            const std::size_t j = img.pixel_index(x, y);
            one.set_pixel(0, 0, img.data[j], img.data[j + 1], img.data[j + 2]);
            CHECK(to_grayscale(one).at(0, 0) == whole.at(x, y));
        }
    }
}
