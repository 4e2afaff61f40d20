import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # echo the acceptance-gate verdict lines even with output capture on;
    # grab the module instance pytest actually ran, whatever its import name
    for name, module in list(sys.modules.items()):
        if name.rpartition(".")[2] != "test_acceptance":
            continue
        results = getattr(module, "RESULTS", None)
        if results:
            terminalreporter.section("acceptance criteria")
            for line in results:
                terminalreporter.write_line(line)
        return
