"""Reference nodal errors for the heat benchmark at x = 0.5.

``HEAT_REFERENCE_ERRORS[n]`` lists ``(t_k, |error|)`` for the degree-``n``
CGL mesh; ``HEAT_TOLERANCES[n]`` is the relative band the error at ``t = 0``
must fall in.
"""

HEAT_REFERENCE_ERRORS = {
    4: [
        (-1.0, 0.00005276),
        (-0.70710678, 0.00097645),
        (0.0, 0.00063440),
        (0.70710678, 0.00029592),
        (1.0, 0.00010552),
    ],
    6: [
        (-1.0, 8.12568908e-7),
        (-0.86602540, 0.00010146),
        (-0.5, 0.00030932),
        (0.0, 0.00022136),
        (0.5, 0.00013419),
        (0.86602540, 0.00007182),
        (1.0, 0.00000162),
    ],
    8: [
        (-1.0, 0.00000117),
        (-0.92387953, 0.00000613),
        (-0.70710678, 0.00004544),
        (-0.38268343, 0.00005753),
        (0.0, 0.00004745),
        (0.38268343, 0.00003362),
        (0.70710678, 0.00002096),
        (0.92387953, 0.00000846),
        (1.0, 0.00000235),
    ],
    12: [
        (-1.0, 0.49451310e-8),
        (-0.96592582, 0.14687232e-7),
        (-0.86602540, 0.23393074e-6),
        (-0.70710678, 0.54494052e-6),
        (-0.5, 0.76722515e-6),
        (-0.25881904, 0.82803283e-6),
        (0.0, 0.76362937e-6),
        (0.25881904, 0.63174173e-6),
        (0.5, 0.47173110e-6),
        (0.70710678, 0.30381367e-6),
        (0.86602540, 0.14341583e-6),
        (0.96592582, 0.21271757e-7),
        (1.0, 0.98902621e-8),
    ],
    16: [
        (-1.0, 0.20628738e-11),
        (-0.98078528, 0.28602854e-10),
        (-0.92387953, 0.48425552e-9),
        (-0.83146961, 0.14258845e-8),
        (-0.70710678, 0.25968220e-8),
        (-0.55557023, 0.36339719e-8),
        (-0.38268343, 0.42916820e-8),
        (-0.19509032, 0.44975339e-8),
        (0.0, 0.43045006e-8),
        (0.19509032, 0.38169887e-8),
        (0.38268343, 0.31414290e-8),
        (0.55557023, 0.23686579e-8),
        (0.70710678, 0.15787207e-8),
        (0.83146961, 0.85640040e-9),
        (0.92387953, 0.30309439e-9),
        (0.98078528, 0.16809109e-10),
        (1.0, 0.41257476e-11),
    ],
}

HEAT_TOLERANCES = {4: 0.20, 6: 0.20, 8: 0.20, 12: 0.30, 16: 0.50}

# |error(-1)| = alpha |error(1)| must hold to this relative tolerance
ANTISYMMETRY_RTOL = 0.01


def reference_error_at_zero(n: int) -> float:
    return dict(HEAT_REFERENCE_ERRORS[n])[0.0]
