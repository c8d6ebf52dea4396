#pragma once

#include "dprisk/error.hpp"

#include <doctest.h>

#include <string>

// Asserts that `expr` throws dprisk::Error carrying `expected`.
#define CHECK_ERROR_CODE(expr, expected)                                                 \
    do {                                                                                 \
        bool thrown_ = false;                                                            \
        try {                                                                            \
            (void)(expr);                                                                \
        } catch (const dprisk::Error& e_) {                                              \
            thrown_ = true;                                                              \
            CHECK_MESSAGE(e_.code() == (expected), "got ", dprisk::error_token(e_.code()), \
                          ": ", e_.what());                                              \
        }                                                                                \
        CHECK_MESSAGE(thrown_, "no dprisk::Error thrown by " #expr);                     \
    } while (false)

inline std::string source_path(const std::string& relative)
{
    return std::string(DPRISK_SOURCE_DIR) + "/" + relative;
}
