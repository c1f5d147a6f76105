# citex tests
