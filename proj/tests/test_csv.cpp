#include "doctest.h"

#include "crit4/csv.hpp"

using crit4::csv::Table;

TEST_CASE("RFC 4180 quoting") {
    CHECK(crit4::csv::quote("plain") == "plain");
    CHECK(crit4::csv::quote("a,b") == "\"a,b\"");
    CHECK(crit4::csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    Table t({"k", "v"});
    t.row(1, 0.1);
    t.row("x\ny", true);
    CHECK(t.str() == "k,v\r\n1,0.1\r\n\"x\ny\",true\r\n");
    CHECK_THROWS(t.row(1, 2, 3));
    CHECK(Table::cell(1.0 / 3) == "0.3333333333333333");
}
