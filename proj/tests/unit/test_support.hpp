#pragma once

#include "advaudio/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

// Fails unless `stmt` throws advaudio::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                                                        \
    do {                                                                                                               \
        try {                                                                                                          \
            stmt;                                                                                                      \
            ADD_FAILURE() << #stmt " did not throw";                                                                   \
        } catch (const ::advaudio::Error& e_) {                                                                        \
            EXPECT_EQ(e_.code(), expected_code) << e_.what();                                                         \
        }                                                                                                              \
    } while (0)

namespace advaudio::testing {

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = std::filesystem::temp_directory_path()
            / ("advaudio_" + std::string(info->test_suite_name()) + "_" + info->name());
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace advaudio::testing
