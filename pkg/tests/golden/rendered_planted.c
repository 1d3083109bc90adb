int select_version(const double *x) {
    if (x[1] <= 10.5) {
        if (x[0] <= 3.5) {
            return 3;
        } else {
            return 1;
        }
    } else {
        if (x[0] <= 3.5) {
            return 2;
        } else {
            return 4;
        }
    }
}
