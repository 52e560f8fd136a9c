"""Numerical non-locality measures of the Foldy-Wouthuysen and Moss-Okninski transformations."""
