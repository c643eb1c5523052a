#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("citeguard-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    operator const std::filesystem::path&() const { return path; }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testsupport
