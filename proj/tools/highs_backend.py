#!/usr/bin/env python3
"""External solver backend: highs_backend.py problem.mps solution.txt [time_limit_seconds].

Writes `status <word>` followed by one `name value` line per column.
"""
import sys

import highspy


def main(argv):
    if len(argv) not in (3, 4):
        sys.stderr.write("usage: highs_backend.py problem.mps solution.txt [time_limit]\n")
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 1)
    if len(argv) == 4:
        h.setOptionValue("time_limit", float(argv[3]))
    if h.readModel(argv[1]) == highspy.HighsStatus.kError:
        sys.stderr.write("cannot read %s\n" % argv[1])
        return 1
    h.run()
    status = h.getModelStatus()
    words = {
        highspy.HighsModelStatus.kOptimal: "optimal",
        highspy.HighsModelStatus.kInfeasible: "infeasible",
        highspy.HighsModelStatus.kUnbounded: "unbounded",
        highspy.HighsModelStatus.kTimeLimit: "feasible_time_limit",
    }
    word = words.get(status, "error")
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(argv[2], "w") as out:
        out.write("status %s\n" % word)
        if word in ("optimal", "feasible_time_limit") and len(values) == lp.num_col_:
            for name, value in zip(lp.col_names_, values):
                out.write("%s %.17g\n" % (name, value))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
