#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dqas {

/// One pool-op index per placeholder.
struct StructureSample {
    std::vector<int> choice;

    StructureSample() = default;
    explicit StructureSample(std::vector<int> c) : choice(std::move(c)) {}
    StructureSample(std::initializer_list<int> c) : choice(c) {}

    std::size_t size() const { return choice.size(); }
    int operator[](std::size_t i) const { return choice[i]; }
    int& operator[](std::size_t i) { return choice[i]; }

    friend auto operator<=>(const StructureSample&, const StructureSample&) = default;
};

} // namespace dqas
