def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale Monte Carlo runs over several seeds (deselect with -m 'not slow')")
