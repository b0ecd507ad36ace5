"""
Independent reference implementations used by the test-suite.
"""
