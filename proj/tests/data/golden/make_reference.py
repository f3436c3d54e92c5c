# Regenerates the golden fit inputs and the reference coefficients with a
# dense Kronecker solve (numpy), independent of the C++ code.
import json

import numpy as np

rng = np.random.default_rng(2024)
N, d, M = 8, 2, 4
X = np.round(rng.standard_normal((N, d)), 6)
T = np.round(rng.standard_normal((N, M)), 6)
edges = [[0, 1, 1.0], [1, 2, 0.5], [2, 3, 2.0], [0, 3, 1.0]]
A = np.zeros((M, M))
for i, j, w in edges:
    A[i, j] = A[j, i] = w
L = np.diag(A.sum(1)) - A
D2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
Z = D2.sum() / N
K = np.exp(-D2 / (1.5 * Z))
alpha, beta = 0.2, 0.9
system = np.kron(np.eye(M), K + alpha * np.eye(N)) + beta * np.kron(L.T, K)
psi = np.linalg.solve(system, T.reshape(-1, order="F")).reshape((N, M), order="F")


def write(name, m):
    with open(name, "w") as f:
        f.write("".join(",".join(repr(float(v)) for v in row) + "\n" for row in m))


write("X.csv", X)
write("T.csv", T)
write("psi_reference.csv", psi)
with open("graph.json", "w") as f:
    json.dump({"nodes": M, "edges": edges}, f, indent=2)
    f.write("\n")
